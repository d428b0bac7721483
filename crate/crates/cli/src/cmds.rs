//! One function per subcommand. All file output lands under `--out` with
//! fixed names so repeated invocations are byte-comparable.

use crate::error::CliError;
use crate::{GasFitArgs, IdsEvalArgs, IdsTrainArgs, RunArgs, SweepArgs, ValidateArgs};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use vanetsim_core::config::{validate_config, ScenarioConfig};
use vanetsim_core::engine::{self, run_sweep, JsonlSink, NullSink, RunOutput};
use vanetsim_core::ids::{self, ingest::CsvSchema, IsolationForest, Label};
use vanetsim_core::ledger::{export_jsonl, fit_gas_table, read_gas_csv};
use vanetsim_core::metrics::{compute_kpis, kpi_csv_string, ReportBundle};
use vanetsim_core::{ForestSettings, GasModel};

fn load_config(path: &Option<PathBuf>, seed: Option<u64>) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match path {
        Some(p) => ScenarioConfig::from_toml_path(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg.validated()?)
}

fn ensure_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}

fn windows_csv(out: &RunOutput) -> String {
    let mut text = String::from(
        "window,start_round,end_round,d_mbit_per_vehicle,cluster_size,model_cluster_mbps,model_vehicle_mbps\n",
    );
    for w in &out.report.windows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            w.index,
            w.start_round,
            w.end_round,
            w.d_mbit_per_vehicle,
            w.cluster_size,
            w.model_cluster_mbps,
            w.model_vehicle_mbps
        ));
    }
    text
}

fn ledgers_jsonl(out: &RunOutput) -> Result<String, CliError> {
    let mut buf = Vec::new();
    export_jsonl(&mut buf, "cloud", &out.state.cloud_chain)
        .and_then(|_| {
            for (id, ledger) in &out.state.cluster_ledgers {
                export_jsonl(&mut buf, &format!("cluster-{}", id.0), ledger)?;
            }
            Ok(())
        })
        .map_err(CliError::runtime)?;
    String::from_utf8(buf).map_err(CliError::runtime)
}

pub fn run(a: RunArgs) -> Result<(), CliError> {
    let cfg = load_config(&a.config, a.seed)?;
    ensure_out(&a.out)?;

    let out = if a.verbose {
        let path = a.out.join("events.jsonl");
        let file = fs::File::create(&path)
            .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
        let mut sink = JsonlSink::new(std::io::BufWriter::new(file));
        let out = engine::run(&cfg, &mut sink)?;
        sink.into_inner().flush().map_err(CliError::runtime)?;
        out
    } else {
        engine::run(&cfg, &mut NullSink)?
    };

    let kpis = kpi_csv_string(&[compute_kpis(&cfg, &out.report)]);
    write_file(&a.out.join("kpis.csv"), &kpis)?;
    write_file(&a.out.join("windows.csv"), &windows_csv(&out))?;
    write_file(&a.out.join("ledgers.jsonl"), &ledgers_jsonl(&out)?)?;

    print!("{kpis}");
    Ok(())
}

pub fn sweep(a: SweepArgs) -> Result<(), CliError> {
    if a.vehicles.is_empty() || a.cluster_sizes.is_empty() {
        return Err(CliError::input("sweep lists must be non-empty"));
    }
    let mut base = load_config(&a.config, a.seed)?;
    if let Some(r) = a.rounds {
        base.rounds = r;
    }
    ensure_out(&a.out)?;

    let cells = run_sweep(&base, &a.vehicles, &a.cluster_sizes)?;
    let bundle = ReportBundle::from_cells(&cells);
    let kpis = bundle.kpi_csv();
    write_file(&a.out.join("kpis.csv"), &kpis)?;
    write_file(&a.out.join("cluster_throughput.csv"), &bundle.cluster_throughput_csv())?;
    write_file(&a.out.join("overhead.csv"), &bundle.overhead_csv())?;

    print!("{kpis}");
    Ok(())
}

pub fn ids_train(a: IdsTrainArgs) -> Result<(), CliError> {
    if a.features.is_empty() {
        return Err(CliError::input("--features must name at least one column"));
    }
    let schema = CsvSchema { feature_columns: a.features.clone(), label_column: a.label.clone() };
    let report = ids::ingest::ingest_flows(&a.data, &schema)
        .map_err(|e| CliError::input(format!("{}: {e}", a.data.display())))?;
    if report.rows.is_empty() {
        return Err(CliError::input(format!("{}: no usable rows", a.data.display())));
    }

    let settings =
        ForestSettings { trees: a.trees, subsample: a.subsample, threshold: a.threshold };
    let forest = ids::fit(&report.rows, &settings, a.seed).map_err(CliError::input)?;

    ensure_out(&a.out)?;
    let path = a.out.join("forest.json");
    forest.save(&path).map_err(CliError::runtime)?;
    println!(
        "trained {} trees on {} rows ({} dropped), saved {}",
        a.trees,
        report.rows.len(),
        report.dropped,
        path.display()
    );
    Ok(())
}

pub fn ids_eval(a: IdsEvalArgs) -> Result<(), CliError> {
    if a.features.is_empty() {
        return Err(CliError::input("--features must name at least one column"));
    }
    let forest = IsolationForest::load(&a.model)
        .map_err(|e| CliError::input(format!("{}: {e}", a.model.display())))?;

    let schema =
        CsvSchema { feature_columns: a.features.clone(), label_column: Some(a.label.clone()) };
    let report = ids::ingest::ingest_flows(&a.data, &schema)
        .map_err(|e| CliError::input(format!("{}: {e}", a.data.display())))?;
    if report.rows.is_empty() {
        return Err(CliError::input(format!("{}: no usable rows", a.data.display())));
    }

    let labels: Vec<Label> = report.rows.iter().filter_map(|r| r.label).collect();
    let preds: Vec<Label> = report
        .rows
        .iter()
        .map(|r| forest.classify(&r.values))
        .collect::<Result<_, _>>()
        .map_err(CliError::input)?;
    let eval = ids::eval::evaluate(&preds, &labels).map_err(CliError::input)?;

    ensure_out(&a.out)?;
    let json = serde_json::to_string_pretty(&eval).map_err(CliError::runtime)?;
    write_file(&a.out.join("eval.json"), &format!("{json}\n"))?;
    println!(
        "accuracy {:.2}%  precision {:.2}%  recall {:.2}%  f1 {:.2}%",
        eval.accuracy, eval.precision, eval.recall, eval.f1
    );
    Ok(())
}

pub fn gas_fit(a: GasFitArgs) -> Result<(), CliError> {
    let file = fs::File::open(&a.data)
        .map_err(|e| CliError::input(format!("{}: {e}", a.data.display())))?;
    let rows = read_gas_csv(file)
        .map_err(|e| CliError::input(format!("{}: {e}", a.data.display())))?;
    let fit = fit_gas_table(&rows).map_err(CliError::input)?;

    #[derive(serde::Serialize)]
    struct Snippet {
        gas_model: GasModel,
    }
    let snippet = toml::to_string_pretty(&Snippet { gas_model: fit.as_gas_model() })
        .map_err(CliError::runtime)?;
    ensure_out(&a.out)?;
    write_file(&a.out.join("gas_fit.toml"), &snippet)?;

    println!("slope {}  intercept {}  r_squared {}", fit.slope, fit.intercept, fit.r_squared);
    Ok(())
}

pub fn validate(a: ValidateArgs) -> Result<(), CliError> {
    let cfg = match &a.config {
        Some(p) => ScenarioConfig::from_toml_path(p)?,
        None => ScenarioConfig::default(),
    };
    let violations = validate_config(&cfg);
    if violations.is_empty() {
        println!("ok");
        Ok(())
    } else {
        for v in &violations {
            println!("violation: {v}");
        }
        Err(CliError::input(format!("{} violation(s)", violations.len())))
    }
}

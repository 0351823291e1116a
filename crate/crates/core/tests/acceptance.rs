//! Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.
//!
//! Each criterion reads the checks of one subcommand run; subcommands shared by
//! several criteria run once.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use serde_json::{json, Value};
use toruslab::lab::experiments::run;
use toruslab::lab::{ExperimentConfig, RunRecord};

struct Gate {
    out: PathBuf,
    runs: HashMap<&'static str, (RunRecord, f64)>,
    failed: usize,
}

impl Gate {
    fn config(&self, name: &str, overrides: Value) -> ExperimentConfig {
        let mut o = overrides;
        o["output_dir"] = json!(self.out);
        ExperimentConfig::resolve(name, None, &o).expect("valid acceptance config")
    }

    fn record(&mut self, name: &'static str) -> (RunRecord, f64) {
        if !self.runs.contains_key(name) {
            let cfg = self.config(name, json!({}));
            let start = Instant::now();
            let rec = run(&cfg).unwrap_or_else(|e| panic!("{name} failed to run: {e}"));
            self.runs.insert(name, (rec, start.elapsed().as_secs_f64()));
        }
        self.runs[name].clone()
    }

    fn report(&mut self, id: u32, title: &str, parts: Vec<(String, bool)>) {
        let ok = parts.iter().all(|p| p.1);
        if !ok {
            self.failed += 1;
        }
        let detail: Vec<String> = parts
            .iter()
            .map(|(d, p)| format!("{}{d}", if *p { "" } else { "✗ " }))
            .collect();
        println!("{} criterion {id:>2} {title}: {}", if ok { "PASS" } else { "FAIL" }, detail.join("; "));
    }

    fn checks(&mut self, id: u32, title: &str, name: &'static str, prefixes: &[&str], budget: Option<f64>) {
        let (rec, secs) = self.record(name);
        let mut parts = Vec::new();
        for p in prefixes {
            let found: Vec<_> = rec.checks.iter().filter(|c| !c.informational && c.name.starts_with(p)).collect();
            if found.is_empty() {
                parts.push((format!("missing check `{p}`"), false));
            }
            for c in found {
                parts.push((format!("{} = {:.4e} ({})", c.name, c.value, c.bound), c.passed));
            }
        }
        if let Some(b) = budget {
            parts.push((format!("runtime {secs:.1} s < {b} s"), secs < b));
        }
        self.report(id, title, parts);
    }
}

fn snapshot(rec: &RunRecord) -> BTreeMap<PathBuf, Vec<u8>> {
    rec.artifacts
        .iter()
        .filter(|p| !p.ends_with("record.json"))
        .map(|p| (p.clone(), std::fs::read(p).expect("artifact readable")))
        .collect()
}

fn main() -> ExitCode {
    let out = std::env::temp_dir().join(format!("toruslab-acceptance-{}", std::process::id()));
    let mut g = Gate { out: out.clone(), runs: HashMap::new(), failed: 0 };

    g.checks(1, "density normalization", "rho", &["density normalization"], Some(10.0));
    g.checks(2, "neighbor-sum identity and Chebyshev recurrence", "rho", &["neighbor-sum", "Chebyshev"], None);
    g.checks(3, "singularity bound", "rho", &["singularity bound"], None);
    g.checks(4, "closed-form/dense equivalence", "regularity", &["closed-form vs dense", "torus eigenvalues vs dense", "dense equivalence runtime"], None);
    g.checks(5, "regularity scaling", "regularity", &["regularity ratio", "|ratio - 1| shrinks"], Some(300.0));
    g.checks(6, "close pairs", "close-pairs", &["close pairs"], Some(120.0));
    g.checks(7, "GUE normalization", "concentration", &["GUE"], None);
    g.checks(8, "free convolution closed forms", "free-conv", &["δ₀", "∫p_t = 1"], None);
    g.checks(9, "flow/free-convolution consistency", "free-conv", &["KS(spectrum"], Some(120.0));
    g.checks(10, "Benigni variance", "benigni", &["Var(√n", "KS of normalized"], Some(900.0));
    g.checks(11, "resolvent-flow structure", "flow", &["drift residual", "negative control", "realized/predicted"], None);
    g.checks(12, "concentration", "concentration", &["mean concentration", "t = 0 identity"], None);
    g.checks(13, "phase-transition diagnostic", "phase-scan", &["wave phase", "product phase", "Gaussian-wave baseline"], Some(600.0));
    g.checks(14, "Fourier variance", "fourier-scan", &["quadratic form vs expectation", "max Var/ℓ non-increasing", "Var ≤ 16ℓ"], None);
    g.checks(15, "Stieltjes derivative bound", "free-conv", &["|f'| ≤ g/η"], None);

    // reproducibility: same seed, same bytes; thread count does not change result tables
    let mut parts = Vec::new();
    for name in ["rho", "close-pairs", "wave-sample", "free-conv"] {
        let (first, _) = g.record(name);
        let before = snapshot(&first);
        let again = run(&g.config(name, json!({}))).expect("rerun");
        let same = before == snapshot(&again);
        parts.push((format!("{name}: {} files byte-identical on rerun", before.len()), same));
    }
    let (serial, _) = g.record("free-conv");
    let is_csv = |p: &PathBuf| p.extension().is_some_and(|e| e == "csv");
    let serial_csv: BTreeMap<_, _> = snapshot(&serial).into_iter().filter(|(p, _)| is_csv(p)).collect();
    let threaded = run(&g.config("free-conv", json!({"threads": 3}))).expect("threaded run");
    let threaded_csv: BTreeMap<_, _> = snapshot(&threaded).into_iter().filter(|(p, _)| is_csv(p)).collect();
    let csv_same = !serial_csv.is_empty() && serial_csv == threaded_csv;
    let tables_same = threaded.results == serial.results;
    parts.push(("free-conv with 3 threads: identical result tables".into(), csv_same && tables_same));
    g.report(16, "reproducibility", parts);

    println!("{} of 16 criteria failed", g.failed);
    let _ = std::fs::remove_dir_all(&out);
    if g.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! Reproducible experiments: default configs, runners and artifact output.
//!
//! Every run writes into its output directory:
//!
//! - one or more CSV files, each with a gnuplot script next to it,
//! - `metadata.txt`: the full config followed by `# derived.*` comment lines (witnesses,
//!   seeds, rounding notes), so it can be fed back as `--config`,
//! - `summary.txt`: one `PASS`/`FAIL` line per check.

pub mod config;
pub mod runners;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub use config::Config;
use config::{format_list, format_matrix};

use crate::error::{Error, Result};
use crate::ilf::conditions::CSV_HEADER as CONDITION_CSV_HEADER;
use crate::lmi::fixtures::{example_k, example_p, FINITE_TIME_MU, HYPER_MU};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentId {
    Fig1Rates,
    ComparisonOde,
    LmiVerify,
    Ex1SampledFiniteTime,
    Ex2Hyper,
    CompareNoise,
    CompareDelay,
    CertifyConditions,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 8] = [
        ExperimentId::Fig1Rates,
        ExperimentId::ComparisonOde,
        ExperimentId::LmiVerify,
        ExperimentId::Ex1SampledFiniteTime,
        ExperimentId::Ex2Hyper,
        ExperimentId::CompareNoise,
        ExperimentId::CompareDelay,
        ExperimentId::CertifyConditions,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentId::Fig1Rates => "fig1-rates",
            ExperimentId::ComparisonOde => "comparison-ode",
            ExperimentId::LmiVerify => "lmi-verify",
            ExperimentId::Ex1SampledFiniteTime => "ex1-sampled-finite-time",
            ExperimentId::Ex2Hyper => "ex2-hyper",
            ExperimentId::CompareNoise => "compare-noise",
            ExperimentId::CompareDelay => "compare-delay",
            ExperimentId::CertifyConditions => "certify-conditions",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            ExperimentId::Fig1Rates => "exponential, hyperexponential and finite-time reference curves",
            ExperimentId::ComparisonOde => "RK4 comparison ODE against its nested-exponential closed form",
            ExperimentId::LmiVerify => "LMI feasibility witnesses a and γ for the example gains",
            ExperimentId::Ex1SampledFiniteTime => "sampled finite-time ILF control, period 1",
            ExperimentId::Ex2Hyper => "hyperexponential ILF control, μ = 0.2",
            ExperimentId::CompareNoise => "paired noise comparison, hyperexponential vs finite-time",
            ExperimentId::CompareDelay => "input-delay comparison, hyperexponential vs finite-time",
            ExperimentId::CertifyConditions => "sampled checks of the ILF conditions",
        }
    }
}

impl std::fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

fn gains(c: &mut Config) {
    c.define("p", format_matrix(&example_p()));
    c.define("k", format_list(example_k().iter().copied()));
}

/// Documented defaults of each experiment.
pub fn default_config(id: ExperimentId) -> Config {
    let mut c = Config::new();
    match id {
        ExperimentId::Fig1Rates => {
            c.define("t_end", 3.0).define("step", 1e-3);
        }
        ExperimentId::ComparisonOde => {
            c.define("alpha", "1, 1").define("y0", 1.0).define("horizon", 3.0).define("step", 1e-4);
        }
        ExperimentId::LmiVerify => {
            gains(&mut c);
            c.define("ft_mu", FINITE_TIME_MU).define("hyper_mu", HYPER_MU).define("witness_tol", 1e-9);
        }
        ExperimentId::Ex1SampledFiniteTime => {
            gains(&mut c);
            c.define("mu", FINITE_TIME_MU)
                .define("period", 1.0)
                .define("x0", "1, 0, 0")
                .define("horizon", 15.0)
                .define("dt", 1e-3)
                .define("v_min", 1e-9)
                .define("norm_floor", 1e-12)
                .define("window", 2.0)
                .define("witness_tol", 1e-9);
        }
        ExperimentId::Ex2Hyper => {
            gains(&mut c);
            c.define("mu", HYPER_MU)
                .define("x0", "1, 0, 0")
                .define("horizon", 10.0)
                .define("dt", 1e-3)
                .define("v_min", 1e-300)
                .define("norm_floor", 1e-12)
                .define("window", 2.0);
        }
        ExperimentId::CompareNoise => {
            gains(&mut c);
            c.define("hyper_mu", HYPER_MU)
                .define("ft_mu", FINITE_TIME_MU)
                .define("x0", "0.5, 0, 0")
                .define("horizon", 10.0)
                .define("dt", 1e-3)
                .define("noise_power", 1e-5)
                .define("noise_interval", 0.01)
                .define("seed", 1)
                .define("seeds", 20)
                .define("required_wins", 15);
        }
        ExperimentId::CompareDelay => {
            gains(&mut c);
            c.define("hyper_mu", HYPER_MU)
                .define("ft_mu", FINITE_TIME_MU)
                .define("x0", "0.5, 0, 0")
                .define("horizon", 10.0)
                .define("dt", 1e-3)
                .define("delay_tau", 0.05);
        }
        ExperimentId::CertifyConditions => {
            gains(&mut c);
            c.define("mu", HYPER_MU).define("seed", 2024).define("witness_tol", 1e-9);
        }
    }
    c
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.to_string(), passed, detail: detail.into() }
    }
}

/// A CSV artifact and how to plot it.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub file: String,
    pub contents: String,
    /// Column indices (1-based) plotted against column 1.
    pub plot_columns: Vec<usize>,
    pub log_y: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub id: ExperimentId,
    pub checks: Vec<Check>,
    pub derived: Vec<(String, String)>,
    pub artifacts: Vec<Artifact>,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn summary_text(&self) -> String {
        let mut out = format!("{}\n", self.id);
        for c in &self.checks {
            let _ = writeln!(out, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        out
    }

    pub fn metadata_text(&self, config: &Config) -> String {
        let mut out = format!("# experiment: {}\n", self.id);
        out.push_str(&config.to_text());
        for (k, v) in &self.derived {
            let _ = writeln!(out, "# derived.{k} = {v}");
        }
        out
    }

    /// Writes artifacts, plot scripts, `metadata.txt` and `summary.txt` into `dir`.
    pub fn write(&self, config: &Config, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for a in &self.artifacts {
            let path = dir.join(&a.file);
            std::fs::write(&path, &a.contents)?;
            written.push(path);
            if !a.plot_columns.is_empty() {
                let script = dir.join(Path::new(&a.file).with_extension("gp"));
                std::fs::write(&script, gnuplot_script(a))?;
                written.push(script);
            }
        }
        for (name, text) in [("metadata.txt", self.metadata_text(config)), ("summary.txt", self.summary_text())] {
            let path = dir.join(name);
            std::fs::write(&path, text)?;
            written.push(path);
        }
        Ok(written)
    }
}

fn gnuplot_script(a: &Artifact) -> String {
    let header: Vec<&str> = a.contents.lines().next().unwrap_or("").split(',').collect();
    let png = Path::new(&a.file).with_extension("png");
    let mut s = String::from("set datafile separator ','\nset key autotitle columnhead\n");
    let _ = writeln!(s, "set terminal pngcairo size 900,600\nset output '{}'", png.display());
    let _ = writeln!(s, "set xlabel '{}'", header.first().copied().unwrap_or("t"));
    if a.log_y {
        s.push_str("set logscale y\n");
    }
    let plots: Vec<String> = a
        .plot_columns
        .iter()
        .map(|c| format!("'{}' using 1:{c} with lines", a.file))
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

fn traj_artifact(file: &str, t: &crate::sim::Trajectory) -> Artifact {
    let n = t.states.first().map_or(0, |x| x.len());
    Artifact { file: file.into(), contents: t.to_csv(), plot_columns: vec![n + 4], log_y: true }
}

fn pair_csv(h: &crate::sim::Trajectory, f: &crate::sim::Trajectory) -> String {
    let mut out = String::from("t,hyper_norm,finite_time_norm\n");
    for k in 0..h.len().min(f.len()) {
        let _ = writeln!(out, "{},{:e},{:e}", h.times[k], h.states[k].norm(), f.states[k].norm());
    }
    out
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

/// Runs one experiment without touching the filesystem.
pub fn execute(id: ExperimentId, cfg: &Config) -> Result<RunSummary> {
    let mut checks = Vec::new();
    let mut derived = Vec::new();
    let mut artifacts = Vec::new();
    match id {
        ExperimentId::Fig1Rates => {
            let curves = runners::fig1_rates(cfg)?;
            let (ordered, fts_zero) = runners::fig1_checks(&curves);
            checks.push(Check::new("ordering HES2 ≤ HES1 ≤ ES", ordered, "tolerance 1e-12"));
            checks.push(Check::new("FTS vanishes for t > 1.25", fts_zero, "tolerance 1e-12"));
            artifacts.push(Artifact {
                file: "rates.csv".into(),
                contents: curves.to_csv(),
                plot_columns: vec![2, 3, 4, 5],
                log_y: false,
            });
        }
        ExperimentId::ComparisonOde => {
            let r = runners::comparison_ode(cfg)?;
            checks.push(Check::new(
                "closed form",
                r.max_relative_error <= 1e-6,
                format!("max relative error {:e}", r.max_relative_error),
            ));
            derived.push(("max_relative_error".into(), fmt(r.max_relative_error)));
            let mut csv = String::from("t,y,closed_form\n");
            let y0 = r.series.values[0];
            for (t, y) in r.series.times.iter().zip(&r.series.values) {
                let exact = y0 * (-crate::ratefn::rho(&r.profile, r.profile.degree(), *t)?).exp();
                let _ = writeln!(csv, "{t},{y:e},{exact:e}");
            }
            artifacts.push(Artifact { file: "comparison.csv".into(), contents: csv, plot_columns: vec![2, 3], log_y: true });
        }
        ExperimentId::LmiVerify => {
            let w = runners::lmi_verify(cfg)?;
            checks.push(Check::new(
                "finite-time LMI feasible",
                w.finite_time.feasible && w.a > 0.0,
                format!("a = {:e}, λmax(lhs) = {:e}", w.a, w.finite_time.lhs_max),
            ));
            checks.push(Check::new(
                "hyperexponential LMI feasible",
                w.hyper.feasible && w.gamma > 0.0,
                format!("γ = {:e}, λmax(lhs) = {:e}", w.gamma, w.hyper.lhs_max),
            ));
            derived.push(("a".into(), fmt(w.a)));
            derived.push(("gamma".into(), fmt(w.gamma)));
            let mut csv = String::from("lmi,mu,witness,lhs_max,sym_min,x_min,tolerance\n");
            for (name, mu, val, r) in [
                ("finite_time", w.finite_time_mu, w.a, &w.finite_time),
                ("hyper", w.hyper_mu, w.gamma, &w.hyper),
            ] {
                let _ = writeln!(csv, "{name},{mu},{val:e},{:e},{:e},{:e},{:e}", r.lhs_max, r.sym_min, r.x_min, r.tolerance);
            }
            artifacts.push(Artifact { file: "lmi.csv".into(), contents: csv, plot_columns: vec![], log_y: false });
        }
        ExperimentId::Ex1SampledFiniteTime => {
            let r = runners::example1(cfg)?;
            checks.push(Check::new(
                "ledger V strictly decreasing",
                r.ledger_decreasing,
                format!("{} sampling instants", r.ledger.len()),
            ));
            checks.push(Check::new(
                "nested rates c_i strictly increasing",
                r.nested.c_increasing,
                format!("a = {:e}", r.a),
            ));
            checks.push(Check::new(
                "decay classified hyperexponential",
                runners::is_hyperexponential(&r.decay),
                format!("{} (monotone fraction {:.3})", r.decay.classification, r.decay.monotone_fraction),
            ));
            derived.push(("a".into(), fmt(r.a)));
            derived.push(("active_end_time".into(), r.trajectory.times[r.active_len - 1].to_string()));
            derived.push(("monotone_fraction".into(), r.decay.monotone_fraction.to_string()));
            artifacts.push(traj_artifact("trajectory.csv", &r.trajectory));
            let mut ledger = String::from("t_i,V_i,clamped,branch,V_tilde,c_i\n");
            for (row, lvl) in r.ledger.iter().zip(&r.nested.levels) {
                let _ = writeln!(ledger, "{},{:e},{},{},{:e},{:e}", row.t, row.v, row.clamped, row.branch, lvl.v_tilde, lvl.c);
            }
            artifacts.push(Artifact { file: "ledger.csv".into(), contents: ledger, plot_columns: vec![2, 6], log_y: true });
            artifacts.push(rates_artifact(&r.decay));
        }
        ExperimentId::Ex2Hyper => {
            let r = runners::example2(cfg)?;
            checks.push(Check::new(
                "V strictly decreasing inside the unit ellipsoid",
                r.v_decreasing,
                format!("entry at t = {}", r.entry.map_or(f64::NAN, |k| r.trajectory.times[k])),
            ));
            checks.push(Check::new(
                "decay classified hyperexponential",
                runners::is_hyperexponential(&r.decay) && r.decay.monotone_fraction >= 0.9,
                format!("{} (monotone fraction {:.3})", r.decay.classification, r.decay.monotone_fraction),
            ));
            derived.push(("monotone_fraction".into(), r.decay.monotone_fraction.to_string()));
            derived.push(("active_end_time".into(), r.trajectory.times[r.active_end - 1].to_string()));
            artifacts.push(traj_artifact("trajectory.csv", &r.trajectory));
            artifacts.push(rates_artifact(&r.decay));
        }
        ExperimentId::CompareNoise => {
            let r = runners::compare_noise(cfg)?;
            checks.push(Check::new(
                "hyperexponential residual not larger in enough paired runs",
                r.wins >= r.required_wins,
                format!("{} of {} (need {})", r.wins, r.pairs.len(), r.required_wins),
            ));
            derived.push(("wins".into(), r.wins.to_string()));
            derived.push(("noise_std".into(), fmt((cfg.f64("noise_power")? / cfg.f64("noise_interval")?).sqrt())));
            let mut csv = String::from("seed,hyper_residual,finite_time_residual\n");
            for p in &r.pairs {
                let _ = writeln!(csv, "{},{:e},{:e}", p.seed, p.hyper, p.finite_time);
            }
            artifacts.push(Artifact { file: "residuals.csv".into(), contents: csv, plot_columns: vec![2, 3], log_y: true });
            artifacts.push(Artifact {
                file: "first_seed.csv".into(),
                contents: pair_csv(&r.first.0, &r.first.1),
                plot_columns: vec![2, 3],
                log_y: true,
            });
        }
        ExperimentId::CompareDelay => {
            let r = runners::compare_delay(cfg)?;
            checks.push(Check::new(
                "both loops bounded",
                r.bounded(),
                format!("sup‖x‖ = {:e} / {:e}, bound {:e}", r.hyper_max, r.finite_time_max, r.bound),
            ));
            checks.push(Check::new(
                "hyperexponential residual not larger",
                r.hyper_wins(),
                format!("{:e} vs {:e}", r.hyper_residual, r.finite_time_residual),
            ));
            derived.push(("hyper_residual".into(), fmt(r.hyper_residual)));
            derived.push(("finite_time_residual".into(), fmt(r.finite_time_residual)));
            derived.push(("delay_steps".into(), r.delay_steps.to_string()));
            if r.delay_rounded {
                derived.push(("warning".into(), "delay_tau rounded to a whole number of steps".into()));
            }
            artifacts.push(Artifact {
                file: "delay.csv".into(),
                contents: pair_csv(&r.hyper, &r.finite_time),
                plot_columns: vec![2, 3],
                log_y: true,
            });
        }
        ExperimentId::CertifyConditions => {
            let r = runners::certify_conditions(cfg)?;
            for rep in &r.reports {
                let detail = format!("margin {:e}, {} samples, {} skipped", rep.margin, rep.sample_count, rep.skipped);
                checks.push(Check::new(&rep.condition_id.to_string(), rep.holds, detail));
            }
            if let Some(c9) = r.report(crate::ilf::ConditionId::C9) {
                let k = c9.estimated_constants["k"];
                checks.push(Check::new(
                    "C9 constant at least √λmin(P)/2.2",
                    k >= r.k_reference - 1e-6,
                    format!("k̂ = {k:e}, reference {:e}", r.k_reference),
                ));
            }
            derived.push(("gamma".into(), fmt(r.gamma)));
            derived.push(("c1".into(), fmt(r.c1)));
            derived.push(("c2".into(), fmt(r.c2)));
            derived.push(("alpha1_hat".into(), fmt(r.alpha1_hat)));
            let mut csv = format!("{CONDITION_CSV_HEADER}\n");
            let mut text = String::new();
            for rep in &r.reports {
                for row in rep.csv_rows() {
                    csv.push_str(&row);
                    csv.push('\n');
                }
                text.push_str(&rep.to_text());
            }
            artifacts.push(Artifact { file: "conditions.csv".into(), contents: csv, plot_columns: vec![], log_y: false });
            artifacts.push(Artifact { file: "conditions.txt".into(), contents: text, plot_columns: vec![], log_y: false });
        }
    }
    Ok(RunSummary { id, checks, derived, artifacts })
}

fn rates_artifact(d: &crate::ratefn::DecayReport) -> Artifact {
    let mut csv = String::from("t,rate\n");
    for (t, r) in d.window_times.iter().zip(&d.instantaneous_rates) {
        let _ = writeln!(csv, "{t},{r:e}");
    }
    Artifact { file: "rates.csv".into(), contents: csv, plot_columns: vec![2], log_y: false }
}

/// Runs and writes artifacts into `out_dir`.
pub fn run(id: ExperimentId, cfg: &Config, out_dir: &Path) -> Result<RunSummary> {
    let summary = execute(id, cfg)?;
    summary.write(cfg, out_dir)?;
    Ok(summary)
}

//! Benchmark harness behind the `gpsort` binary: generate instances, run
//! metered trials concurrently, and aggregate reports into plottable CSV.
//!
//! Reports are append-only JSON lines; the CSV mirrors them column for
//! column. Each trial derives its RNG from the master seed and the trial
//! index, so concurrency cannot change any reported number.

use crate::er::SkipBfsConfig;
use crate::gpsc::{build_predictor, gpsc_sort_with_predictor, GpscConfig};
use crate::instance::{mix_seed, opt_cost, GenParams, Instance, Model};
use crate::oracle::OracleSession;
use crate::solve::{solve_bipartite, solve_er, solve_naive};
use crate::weighted::{sort_weighted_doubling_info, WeightedConfig};
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Which solver a trial runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Er,
    Bipartite,
    Gpsc,
    Weighted,
    Naive,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Algorithm::Er => "er",
            Algorithm::Bipartite => "bipartite",
            Algorithm::Gpsc => "gpsc",
            Algorithm::Weighted => "weighted",
            Algorithm::Naive => "naive",
        };
        f.write_str(s)
    }
}

impl Algorithm {
    /// The models each solver understands. The naive baseline needs every
    /// pivot edge present, which only the `er` generator (at p = 1) offers.
    pub fn check_model(self, model: Model) -> Result<()> {
        let ok = matches!(
            (self, model),
            (Algorithm::Er, Model::Er)
                | (Algorithm::Naive, Model::Er)
                | (Algorithm::Bipartite, Model::Bipartite)
                | (Algorithm::Gpsc, Model::Gpsc)
                | (Algorithm::Weighted, Model::Weighted)
        );
        if ok {
            Ok(())
        } else {
            Err(Error::ModelMismatch {
                algo: self.to_string(),
                model: model.to_string(),
            })
        }
    }
}

/// One metered trial, flat enough to serialize as a CSV row.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub model: Model,
    pub algo: Algorithm,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_a: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_b: Option<usize>,
    pub instance_seed: u64,
    pub trial: usize,
    pub trial_seed: u64,
    pub query_count: usize,
    pub cost: f64,
    pub wall_ms: f64,
    pub correct: bool,
    /// Width of the ground truth, for normalizations where k is not a
    /// generator parameter.
    pub width: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels_skipped: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub find_min_calls: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictor_wrong_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_tau: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
}

/// Run one seeded trial of `algo` against `instance`.
pub fn run_one(instance: &Instance, algo: Algorithm, trial: usize, trial_seed: u64) -> Result<RunReport> {
    algo.check_model(instance.model)?;
    let graph = &instance.graph;
    let truth = graph.ground_truth();
    let mut session = OracleSession::new(graph);
    let start = Instant::now();

    let correct;
    let mut levels_skipped = None;
    let mut find_min_calls = None;
    let mut predictor_wrong_max = None;
    let mut tau = None;
    let mut k_tau = None;
    let mut ratio = None;
    match algo {
        Algorithm::Er => {
            let k = instance
                .params
                .k
                .ok_or_else(|| Error::InvalidParams("er instance lacks k".into()))?;
            match solve_er(&mut session, k, &SkipBfsConfig::default(), trial_seed) {
                Ok((poset, skipped)) => {
                    correct = &poset == truth;
                    levels_skipped = Some(skipped);
                }
                // A with-high-probability miss is a legitimate outcome of a
                // trial, not a harness failure.
                Err(Error::InconsistentExtension { .. }) => correct = false,
                Err(e) => return Err(e),
            }
        }
        Algorithm::Naive => {
            let poset = solve_naive(&mut session, trial_seed)?;
            correct = &poset == truth;
        }
        Algorithm::Bipartite => {
            let (poset, calls) = solve_bipartite(&mut session, trial_seed)?;
            correct = &poset == truth;
            find_min_calls = Some(calls);
        }
        Algorithm::Gpsc => {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
            let cfg = GpscConfig::default();
            let mut view = session.view();
            let predictor = build_predictor(&mut view, &cfg, &mut rng)?;
            let (poset, _) = gpsc_sort_with_predictor(&mut view, &predictor, &mut rng)?;
            predictor_wrong_max = predictor.wrong_per_vertex(truth).into_iter().max();
            correct = &poset == truth;
        }
        Algorithm::Weighted => {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
            let (le, info) =
                sort_weighted_doubling_info(&mut session, &WeightedConfig::default(), &mut rng)?;
            correct = truth
                .total_order_sequence()
                .is_some_and(|seq| seq == le.order());
            tau = info.tau;
            k_tau = info.k_tau;
            let opt = opt_cost(graph)?;
            if opt > 0.0 {
                ratio = Some(session.report().cost / opt);
            }
        }
    }

    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let meter = session.report();
    Ok(RunReport {
        model: instance.model,
        algo,
        n: graph.n(),
        k: instance.params.k,
        p: instance.params.p.or(instance.params.extra_edge_prob),
        w: instance.params.w,
        density: instance.params.density,
        n_a: instance.params.n_a,
        n_b: instance.params.n_b,
        instance_seed: instance.seed,
        trial,
        trial_seed,
        query_count: meter.query_count,
        cost: meter.cost,
        wall_ms,
        correct,
        width: truth.width(),
        levels_skipped,
        find_min_calls,
        predictor_wrong_max,
        tau,
        k_tau,
        ratio,
    })
}

/// Run `trials` independent trials concurrently, in deterministic order.
pub fn run_trials(
    instance: &Instance,
    algo: Algorithm,
    trials: usize,
    master_seed: u64,
) -> Result<Vec<RunReport>> {
    algo.check_model(instance.model)?;
    let mut reports = (0..trials)
        .into_par_iter()
        .map(|t| run_one(instance, algo, t, mix_seed(master_seed, t as u64 + 1)).map(|r| (t, r)))
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by_key(|&(t, _)| t);
    Ok(reports.into_iter().map(|(_, r)| r).collect())
}

fn fmt_opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

/// Column order of `reports.csv`, documented in the README.
pub const CSV_HEADER: &str = "model,algo,n,k,p,w,density,n_a,n_b,instance_seed,trial,trial_seed,\
query_count,cost,wall_ms,correct,width,levels_skipped,find_min_calls,predictor_wrong_max,tau,k_tau,ratio";

pub fn csv_row(r: &RunReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.3},{},{},{},{},{},{},{},{}",
        r.model,
        r.algo,
        r.n,
        fmt_opt(&r.k),
        fmt_opt(&r.p),
        fmt_opt(&r.w),
        fmt_opt(&r.density),
        fmt_opt(&r.n_a),
        fmt_opt(&r.n_b),
        r.instance_seed,
        r.trial,
        r.trial_seed,
        r.query_count,
        r.cost,
        r.wall_ms,
        r.correct,
        r.width,
        fmt_opt(&r.levels_skipped),
        fmt_opt(&r.find_min_calls),
        fmt_opt(&r.predictor_wrong_max),
        fmt_opt(&r.tau),
        fmt_opt(&r.k_tau),
        fmt_opt(&r.ratio),
    )
}

fn append_lines(path: &Path, header: Option<&str>, lines: &[String]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        if let Some(h) = header {
            writeln!(file, "{h}")?;
        }
    }
    for line in lines {
        writeln!(file, "{line}")?;
    }
    Ok(())
}

/// Append reports to `reports.jsonl` and `reports.csv` under `out_dir`.
pub fn write_reports(out_dir: &Path, reports: &[RunReport]) -> Result<(PathBuf, PathBuf)> {
    let jsonl = out_dir.join("reports.jsonl");
    let csv = out_dir.join("reports.csv");
    let json_lines = reports
        .iter()
        .map(|r| Ok(serde_json::to_string(r)?))
        .collect::<Result<Vec<_>>>()?;
    append_lines(&jsonl, None, &json_lines)?;
    let csv_lines: Vec<String> = reports.iter().map(csv_row).collect();
    append_lines(&csv, Some(CSV_HEADER), &csv_lines)?;
    Ok((jsonl, csv))
}

pub fn read_reports(path: &Path) -> Result<Vec<RunReport>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

/// Median of a sample; the mean of the middle pair on even sizes.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = v.len();
    if m == 0 {
        f64::NAN
    } else if m % 2 == 1 {
        v[m / 2]
    } else {
        (v[m / 2 - 1] + v[m / 2]) / 2.0
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let sx: f64 = logs.iter().map(|p| p.0).sum();
    let sy: f64 = logs.iter().map(|p| p.1).sum();
    let sxx: f64 = logs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = logs.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Per-configuration aggregate over all its trials.
#[derive(Clone, Debug, PartialEq)]
pub struct MedianRow {
    pub family: String,
    pub n: usize,
    pub trials: usize,
    pub correct_frac: f64,
    pub query_median: f64,
    pub cost_median: f64,
    /// queries / (n k^2 ln^3 n)
    pub norm_nk2ln3: f64,
    /// queries / (n k ln n)
    pub norm_nkln: f64,
    pub ratio_median: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlopeRow {
    pub family: String,
    pub points: usize,
    pub slope: f64,
}

#[derive(Clone, Debug, Default)]
pub struct ReportTables {
    pub medians: Vec<MedianRow>,
    pub slopes: Vec<SlopeRow>,
}

/// Everything identifying a configuration except the size n.
fn family_key(r: &RunReport) -> String {
    let mut key = format!("model={} algo={}", r.model, r.algo);
    if let Some(k) = r.k {
        key += &format!(" k={k}");
    }
    if let Some(p) = r.p {
        key += &format!(" p={p:.4}");
    }
    if let Some(w) = r.w {
        key += &format!(" W={w}");
    }
    if let Some(d) = r.density {
        key += &format!(" density={d:.4}");
    }
    key
}

/// Group reports into per-configuration medians and per-family log-log
/// slopes of median queries against n.
pub fn aggregate(reports: &[RunReport]) -> Result<ReportTables> {
    if reports.is_empty() {
        return Err(Error::InsufficientData("no reports to aggregate".into()));
    }
    let mut by_config: Vec<(String, usize, Vec<&RunReport>)> = Vec::new();
    for r in reports {
        let fam = family_key(r);
        match by_config
            .iter_mut()
            .find(|(f, n, _)| *f == fam && *n == r.n)
        {
            Some((_, _, rs)) => rs.push(r),
            None => by_config.push((fam, r.n, vec![r])),
        }
    }
    let mut medians = Vec::new();
    for (family, n, rs) in &by_config {
        let q: Vec<f64> = rs.iter().map(|r| r.query_count as f64).collect();
        let c: Vec<f64> = rs.iter().map(|r| r.cost).collect();
        let ratios: Vec<f64> = rs.iter().filter_map(|r| r.ratio).collect();
        let k = rs[0].k.unwrap_or(rs[0].width).max(1) as f64;
        let nf = (*n).max(2) as f64;
        let q_med = median(&q);
        medians.push(MedianRow {
            family: family.clone(),
            n: *n,
            trials: rs.len(),
            correct_frac: rs.iter().filter(|r| r.correct).count() as f64 / rs.len() as f64,
            query_median: q_med,
            cost_median: median(&c),
            norm_nk2ln3: q_med / (nf * k * k * nf.ln().powi(3)),
            norm_nkln: q_med / (nf * k * nf.ln()),
            ratio_median: if ratios.is_empty() {
                None
            } else {
                Some(median(&ratios))
            },
        });
    }
    medians.sort_by(|a, b| (&a.family, a.n).cmp(&(&b.family, b.n)));

    let mut slopes = Vec::new();
    let mut families: Vec<&str> = medians.iter().map(|m| m.family.as_str()).collect();
    families.dedup();
    for family in families {
        let pts: Vec<(f64, f64)> = medians
            .iter()
            .filter(|m| m.family == family && m.query_median > 0.0)
            .map(|m| (m.n as f64, m.query_median))
            .collect();
        if pts.len() >= 2 {
            slopes.push(SlopeRow {
                family: family.to_string(),
                points: pts.len(),
                slope: loglog_slope(&pts),
            });
        }
    }
    if slopes.is_empty() {
        return Err(Error::InsufficientData(
            "need at least two sizes of some configuration to fit a slope".into(),
        ));
    }
    Ok(ReportTables { medians, slopes })
}

pub const MEDIANS_HEADER: &str =
    "family,n,trials,correct_frac,query_median,cost_median,norm_nk2ln3,norm_nkln,ratio_median";
pub const SLOPES_HEADER: &str = "family,points,slope";

/// Write the aggregate tables as CSV under `out_dir`.
pub fn write_tables(out_dir: &Path, tables: &ReportTables) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(out_dir)?;
    let medians_path = out_dir.join("report_medians.csv");
    let slopes_path = out_dir.join("report_slopes.csv");
    let mut med = String::from(MEDIANS_HEADER);
    for m in &tables.medians {
        med += &format!(
            "\n\"{}\",{},{},{:.4},{},{},{:.6},{:.6},{}",
            m.family,
            m.n,
            m.trials,
            m.correct_frac,
            m.query_median,
            m.cost_median,
            m.norm_nk2ln3,
            m.norm_nkln,
            fmt_opt(&m.ratio_median),
        );
    }
    med.push('\n');
    fs::write(&medians_path, med)?;
    let mut sl = String::from(SLOPES_HEADER);
    for s in &tables.slopes {
        sl += &format!("\n\"{}\",{},{:.6}", s.family, s.points, s.slope);
    }
    sl.push('\n');
    fs::write(&slopes_path, sl)?;
    Ok((medians_path, slopes_path))
}

/// Default instance file name for a generation request.
pub fn default_instance_name(model: Model, gp: &GenParams, seed: u64) -> String {
    match model {
        Model::Er => format!("er-n{}-k{}-p{}-seed{}.json", gp.n, gp.k, gp.p, seed),
        Model::Bipartite => format!("bipartite-n{}-d{}-seed{}.json", gp.n, gp.p, seed),
        Model::Gpsc => format!("gpsc-n{}-k{}-p{}-seed{}.json", gp.n, gp.k, gp.p, seed),
        Model::Weighted => format!("weighted-n{}-W{}-seed{}.json", gp.n, gp.w, seed),
    }
}

/// Generate an instance and write it to `out_path`.
pub fn cmd_gen(model: Model, gp: &GenParams, seed: u64, out_path: &Path) -> Result<Instance> {
    let instance = Instance::generate(model, gp, seed)?;
    if let Some(dir) = out_path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    instance.save(out_path)?;
    Ok(instance)
}

/// Load an instance, run trials, and append the reports under `out_dir`.
pub fn cmd_run(
    instance_path: &Path,
    algo: Algorithm,
    trials: usize,
    master_seed: u64,
    out_dir: &Path,
) -> Result<Vec<RunReport>> {
    let instance = Instance::load(instance_path)?;
    let reports = run_trials(&instance, algo, trials, master_seed)?;
    write_reports(out_dir, &reports)?;
    Ok(reports)
}

/// Aggregate a JSON-lines report stream and write the CSV tables.
pub fn cmd_report(reports_path: &Path, out_dir: &Path) -> Result<ReportTables> {
    let reports = read_reports(reports_path)?;
    let tables = aggregate(&reports)?;
    write_tables(out_dir, &tables)?;
    Ok(tables)
}

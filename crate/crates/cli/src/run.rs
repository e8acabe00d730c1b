//! Executes a validated configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use vlab_core::asymptotics::{estimate_schatten_order, fit_power_law, fit_slowly_varying_log, MIN_FIT_POINTS};
use vlab_core::disk::{
    assemble_restriction, basis_from_table, DiskModeIndex, HarmonicModeIndex, SchmidtSpec, ZeroTable,
};
use vlab_core::gallery::{assemble_sum, make_nonnegative_c, make_random_t, GallerySeed, ProfileSpec};
use vlab_core::linalg::{s_numbers, top_eigenvalues};
use vlab_core::volterra::{
    adjoint_verdict, criterion_divergence_report, one_d_volterra_matrix, SpectrumSample, VolterraVerdict,
};
use vlab_core::{par, OperatorModel, Result as LabResult};

use crate::config::{CProfile, ConfigError, ExperimentConfig, Plan};
use crate::report::{ExperimentReport, RunRecord, VerdictRecord, ARTIFACT_VERSION};

/// Environment variable naming the Bessel zero cache file.
pub const BESSEL_CACHE_ENV: &str = "VLAB_BESSEL_CACHE";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub bessel_cache: Option<PathBuf>,
}

impl RunOptions {
    pub fn from_env() -> Self {
        Self { bessel_cache: std::env::var_os(BESSEL_CACHE_ENV).map(PathBuf::from) }
    }
}

/// Runs the experiment with options taken from the environment.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport, ConfigError> {
    run_with(cfg, &RunOptions::from_env())
}

/// Runs the experiment. Failures of individual runs are recorded in the
/// report; only an invalid configuration is an error.
pub fn run_with(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentReport, ConfigError> {
    let plan = Plan::resolve(cfg).map_err(ConfigError::Invalid)?;
    let started_unix_s = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let (records, verdicts) = match plan {
        Plan::Perturb { .. } => run_perturb(&plan),
        Plan::Disk { .. } => run_disk(&plan, opts),
        Plan::Criterion { n, eps } => (run_criterion(&n, &eps), Vec::new()),
        Plan::Volterra1d { dims, window } => (run_volterra_1d(&dims, window), Vec::new()),
    };
    Ok(ExperimentReport {
        artifact_version: ARTIFACT_VERSION.to_string(),
        config: cfg.clone(),
        started_unix_s,
        wall_time_s: clock.elapsed().as_secs_f64(),
        records,
        verdicts,
    })
}

type Params = BTreeMap<String, String>;

fn params(pairs: &[(&str, String)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// Default fit window: the resolved head (10, N/10), or (3, N/2) for small N.
fn default_window(n: usize) -> Option<(usize, usize)> {
    if n / 10 >= 10 + MIN_FIT_POINTS {
        Some((10, n / 10))
    } else if n / 2 >= 3 + MIN_FIT_POINTS {
        Some((3, n / 2))
    } else {
        None
    }
}

/// Spectrum, s-numbers and fits of one operator.
fn measure(
    operator: OperatorModel,
    record: &mut RunRecord,
    window: Option<(usize, usize)>,
    log_law: bool,
) -> LabResult<SpectrumSample> {
    let dim = operator.dim();
    record.dim = Some(dim);
    let s = s_numbers(&operator)?;
    record.s1 = Some(s.largest());
    if let Some(w) = window.filter(|w| w.1 <= dim) {
        record.fit = Some(if log_law { fit_slowly_varying_log(&s, w)? } else { fit_power_law(&s, w)? });
        record.schatten_order = Some(estimate_schatten_order(&s, w)?);
    }
    let sample = SpectrumSample::compute(operator)?;
    let r = sample.refinement();
    record.spectral_radius = Some(r.spectral_radius);
    record.top_eigenvalues = top_eigenvalues(&sample.eigenvalues, 3);
    Ok(sample)
}

/// Measures one family over its levels and applies the persistence rule.
fn family<L, F>(
    base: &Params,
    levels: &[L],
    label: impl Fn(&L) -> Vec<(&'static str, String)> + Sync,
    build: F,
    window: Option<(usize, usize)>,
    log_law: bool,
    delta: Option<f64>,
) -> (Vec<RunRecord>, Option<VerdictRecord>)
where
    L: Sync,
    F: Fn(&L) -> LabResult<OperatorModel> + Sync,
{
    let clock = Instant::now();
    let runs = par::map(levels, |l| {
        let start = Instant::now();
        let mut p = base.clone();
        for (k, v) in label(l) {
            p.insert(k.to_string(), v);
        }
        let mut record = RunRecord::new(p);
        let sample = build(l).and_then(|op| {
            let w = window.or_else(|| default_window(op.dim()));
            measure(op, &mut record, w, log_law)
        });
        if let Err(e) = &sample {
            record.error = Some(e.to_string());
        }
        record.wall_time_s = start.elapsed().as_secs_f64();
        (record, sample.ok())
    });
    let (mut records, samples): (Vec<RunRecord>, Vec<Option<SpectrumSample>>) = runs.into_iter().unzip();
    let Some(delta) = delta else {
        return (records, None);
    };
    let mut verdict = VerdictRecord {
        params: base.clone(),
        verdict: None,
        adjoint_persistent_nonzero: None,
        adjoint_mismatch: None,
        error: None,
        wall_time_s: 0.0,
    };
    match samples.into_iter().collect::<Option<Vec<_>>>() {
        Some(samples) => {
            let refinements = samples.iter().map(SpectrumSample::refinement).collect();
            let v = VolterraVerdict::from_refinements(refinements, delta);
            for r in &mut records {
                r.persistent_nonzero = Some(v.persistent_nonzero);
            }
            match adjoint_verdict(&samples, delta) {
                Ok((adj, mismatch)) => {
                    verdict.adjoint_persistent_nonzero = Some(adj.persistent_nonzero);
                    verdict.adjoint_mismatch = Some(mismatch);
                }
                Err(e) => verdict.error = Some(format!("adjoint: {e}")),
            }
            verdict.verdict = Some(v);
        }
        None => verdict.error = Some("one or more refinement levels failed".into()),
    }
    verdict.wall_time_s = clock.elapsed().as_secs_f64();
    (records, Some(verdict))
}

fn num(x: f64) -> String {
    x.to_string()
}

fn run_perturb(plan: &Plan) -> (Vec<RunRecord>, Vec<VerdictRecord>) {
    let Plan::Perturb { c, q, a, q_j, dims, seeds, delta, window, verdicts } = plan else {
        unreachable!("perturbation plan expected")
    };
    let (c_key, c_values, log_law) = match c {
        CProfile::Power(v) => ("alpha", v, false),
        CProfile::Log(v) => ("beta", v, true),
    };
    let mut tuples = Vec::new();
    for &cv in c_values {
        for &qv in q {
            for &av in a {
                for &seed in seeds {
                    tuples.push((cv, qv, av, seed));
                }
            }
        }
    }
    let results = par::map(&tuples, |&(cv, qv, av, seed)| {
        let c_profile = if log_law { ProfileSpec::log_power(av, cv) } else { ProfileSpec::power_law(av, cv) };
        let t_profile = ProfileSpec::power_law(1.0, 1.0 / qv);
        let j_profile = q_j.map(|qj| ProfileSpec::power_law(1.0, 1.0 / qj));
        let d = verdicts.then(|| delta.unwrap_or(0.05 * av));
        let mut p = vec![(c_key, num(cv)), ("q", num(qv)), ("a", num(av)), ("seed", seed.to_string())];
        if let Some(qj) = q_j {
            p.push(("q_j", num(*qj)));
        }
        if let Some(d) = d {
            p.push(("delta", num(d)));
        }
        family(
            &params(&p),
            dims,
            |_| Vec::new(),
            |&n| {
                let c = make_nonnegative_c(&c_profile, n)?;
                let t = make_random_t(&t_profile, n, GallerySeed(seed), j_profile.as_ref())?;
                assemble_sum(&c, &t)
            },
            *window,
            log_law,
            d,
        )
    });
    collect(results)
}

fn collect(results: Vec<(Vec<RunRecord>, Option<VerdictRecord>)>) -> (Vec<RunRecord>, Vec<VerdictRecord>) {
    let mut records = Vec::new();
    let mut verdicts = Vec::new();
    for (r, v) in results {
        records.extend(r);
        verdicts.extend(v);
    }
    (records, verdicts)
}

/// s_1·scale, decreasing linearly to 40% of that at the last term.
fn schmidt_values(top: f64, rank: usize) -> Vec<f64> {
    if rank == 1 {
        return vec![top];
    }
    (0..rank).map(|j| top * (1.0 - 0.6 * j as f64 / (rank - 1) as f64)).collect()
}

fn run_disk(plan: &Plan, opts: &RunOptions) -> (Vec<RunRecord>, Vec<VerdictRecord>) {
    let Plan::Disk { levels, seeds, rank, delta, s_scale, source_n, source_k, image_n } = plan else {
        unreachable!("disk plan expected")
    };
    let n_top = levels.iter().map(|l| l.0).max().unwrap_or(0);
    let k_top = levels.iter().map(|l| l.1).max().unwrap_or(0);
    let table = match &opts.bessel_cache {
        Some(path) => ZeroTable::load_or_compute(path, n_top, k_top),
        None => ZeroTable::compute(n_top, k_top),
    };
    let base =
        |seed: u64| params(&[("seed", seed.to_string()), ("rank", rank.to_string()), ("s_scale", num(*s_scale))]);
    let table = match table {
        Ok(t) => t,
        Err(e) => {
            let records = seeds.iter().map(|&s| RunRecord::failed(base(s), format!("Bessel zeros: {e}"))).collect();
            return (records, Vec::new());
        }
    };
    let (sn, sk, im) = (*source_n as i32, *source_k, *image_n as i32);
    let source: Vec<DiskModeIndex> = (-sn..=sn).flat_map(|n| (1..=sk).map(move |k| DiskModeIndex::new(n, k))).collect();
    let image: Vec<HarmonicModeIndex> = (-im..=im).map(HarmonicModeIndex).collect();
    let s1 = table.get(0, 1).map(|j| 1.0 / (j * j)).unwrap_or(f64::NAN);
    let d = delta.unwrap_or(0.05 * s1);
    let results = par::map(seeds, |&seed| {
        let mut p = base(seed);
        p.insert("delta".into(), num(d));
        match SchmidtSpec::random(&schmidt_values(s_scale * s1, *rank), source.clone(), image.clone(), seed) {
            Ok(spec) => family(
                &p,
                levels,
                |&(n, k)| vec![("level", format!("{n}x{k}"))],
                |&(n, k)| assemble_restriction(&basis_from_table(&table, n, k)?, &spec),
                None,
                false,
                Some(d),
            ),
            Err(e) => (vec![RunRecord::failed(p, e)], None),
        }
    });
    collect(results)
}

fn run_criterion(ns: &[u32], eps: &[f64]) -> Vec<RunRecord> {
    par::map(ns, |&n| {
        let start = Instant::now();
        let mut record = RunRecord::new(params(&[("n", n.to_string())]));
        match criterion_divergence_report(n, eps) {
            Ok(r) => record.criterion = Some(r),
            Err(e) => record.error = Some(e.to_string()),
        }
        record.wall_time_s = start.elapsed().as_secs_f64();
        record
    })
}

fn run_volterra_1d(dims: &[usize], window: Option<(usize, usize)>) -> Vec<RunRecord> {
    let base = Params::new();
    family(&base, dims, |_| Vec::new(), |&n| one_d_volterra_matrix(n), window, false, None).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows() {
        assert_eq!(default_window(1024), Some((10, 102)));
        assert_eq!(default_window(64), Some((3, 32)));
        assert_eq!(default_window(8), None);
    }

    #[test]
    fn schmidt_values_decrease() {
        assert_eq!(schmidt_values(1.0, 1), vec![1.0]);
        let v = schmidt_values(0.5, 3);
        assert!((v[1] - 0.35).abs() < 1e-15 && (v[2] - 0.2).abs() < 1e-15);
    }
}

//! Grid expansion and per-run evaluation for the experiment subcommands.
//!
//! Every run is identified by its grid index and seed. The random points
//! of a run come from `ChaCha8Rng::seed_from_u64(seed)` on stream
//! `grid_index`, so a run's output does not depend on scheduling. Rows are
//! written in grid order, seeds innermost.

use std::io::Write;
use std::time::Instant;

use num_rational::BigRational;
use padic_approx::count::{
    count_brute, diophantine_exponent_estimate, evaluate_bounds, is_member, ApproxProfile,
    BoundCheck, ExponentSchedule,
};
use padic_approx::dim::{cover_critical_exponent, mtprr_dimension, theorem2_dimension, v_vector, WeightSplit};
use padic_approx::lattice::{build_lattice, check_lambda1_bounds, successive_minima, verify_geometry};
use padic_approx::ubiquity::{ubiquity_density_check, Ball};
use padic_approx::{Budget, Error, PadicInt, Prime};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{
    rationals, CountGrid, CountMethod, DimensionGrid, ExperimentConfig, ExponentGrid, Grid, LatticeGrid,
    RadiusChoice, UbiquityGrid,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RowStatus {
    Ok,
    ConstraintViolation,
    Timeout,
    Error,
    InvariantViolation,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Ok => "OK",
            RowStatus::ConstraintViolation => "CONSTRAINT_VIOLATION",
            RowStatus::Timeout => "TIMEOUT",
            RowStatus::Error => "ERROR",
            RowStatus::InvariantViolation => "INVARIANT_VIOLATION",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Row {
    pub values: Vec<String>,
    pub status: RowStatus,
    pub flags: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub header: Vec<String>,
    pub rows: Vec<Row>,
}

impl RunOutput {
    pub fn count(&self, status: RowStatus) -> usize {
        self.rows.iter().filter(|r| r.status == status).count()
    }

    /// 2 on any invariant violation, else 1 on any runtime error, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.count(RowStatus::InvariantViolation) > 0 {
            2
        } else if self.count(RowStatus::Error) > 0 {
            1
        } else {
            0
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = self.header.clone();
        header.extend(["status".to_string(), "flags".to_string()]);
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = row.values.clone();
            rec.push(row.status.as_str().to_string());
            rec.push(row.flags.join(";"));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Settings shared by every run of one invocation.
#[derive(Clone, Copy, Debug)]
pub struct RunContext {
    pub budget: Budget,
    pub deadline: Option<Instant>,
    pub inject_fault: bool,
}

type Job<'a> = Box<dyn Fn(&RunContext) -> Row + Send + Sync + 'a>;

fn rng_for(seed: u64, grid_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(grid_index as u64);
    rng
}

fn random_point(p: Prime, n: usize, precision: usize, rng: &mut ChaCha8Rng) -> Result<Vec<PadicInt>, Error> {
    (0..n).map(|_| PadicInt::random_with(p, precision, rng)).collect()
}

fn padded<T: ToString>(items: &[T], width: usize) -> Vec<String> {
    let mut v: Vec<String> = items.iter().map(|i| i.to_string()).collect();
    v.resize(width, String::new());
    v
}

fn numbered(prefix: &str, width: usize) -> Vec<String> {
    (1..=width).map(|i| format!("{prefix}_{i}")).collect()
}

/// A row whose computation stopped with `err`; `width` result cells are
/// left empty.
fn failed_row(mut values: Vec<String>, width: usize, err: &Error) -> Row {
    values.extend(std::iter::repeat_n(String::new(), width));
    let status = match err {
        Error::InfeasibleSize { .. } => RowStatus::Timeout,
        Error::ConstraintViolation(_) | Error::NoOverfullBucket => RowStatus::ConstraintViolation,
        _ => RowStatus::Error,
    };
    Row {
        values,
        status,
        flags: vec![err.to_string()],
    }
}

fn bound_cell(b: &BoundCheck) -> String {
    b.value().map_or_else(|| "NA".to_string(), |v| v.to_string())
}

/// Runs every job of the configured grid on a pool of `parallel` threads.
pub fn run(config: &ExperimentConfig, ctx: RunContext, parallel: Option<usize>) -> Result<RunOutput, String> {
    let (header, result_width, jobs) = match &config.grid {
        Grid::Count(g) => count_jobs(g, &config.seeds)?,
        Grid::Lattice(g) => lattice_jobs(g, &config.seeds)?,
        Grid::Dimension(g) => dimension_jobs(g, &config.seeds)?,
        Grid::Ubiquity(g) => ubiquity_jobs(g, &config.seeds)?,
        Grid::Exponent(g) => exponent_jobs(g, &config.seeds)?,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(width) = parallel {
        builder = builder.num_threads(width);
    }
    let pool = builder.build().map_err(|e| e.to_string())?;
    let key_width = header.len() - result_width;
    let rows = pool.install(|| {
        jobs.par_iter()
            .map(|(key, job)| {
                if ctx.deadline.is_some_and(|d| Instant::now() > d) {
                    let mut values = key.clone();
                    values.resize(key_width, String::new());
                    values.extend(std::iter::repeat_n(String::new(), result_width));
                    return Row {
                        values,
                        status: RowStatus::Timeout,
                        flags: vec!["wall-clock budget exhausted".into()],
                    };
                }
                job(&ctx)
            })
            .collect()
    });
    Ok(RunOutput { header, rows })
}

type Jobs<'a> = (Vec<String>, usize, Vec<(Vec<String>, Job<'a>)>);

fn parse_prime(p: u64) -> Result<Prime, String> {
    Prime::new(p).map_err(|e| e.to_string())
}

fn count_jobs<'a>(g: &'a CountGrid, seeds: &'a [u64]) -> Result<Jobs<'a>, String> {
    let width = g.tau.iter().map(Vec::len).max().unwrap_or(0);
    let mut header: Vec<String> = ["p", "n", "N"].map(String::from).to_vec();
    header.extend(numbered("tau", width));
    header.extend(["precision", "seed", "method"].map(String::from));
    let results = [
        "count",
        "lower_proof",
        "lower_stmt",
        "upper_C1",
        "upper_exponent",
        "tau_hat",
    ];
    header.extend(results.map(String::from));
    let mut jobs: Vec<(Vec<String>, Job<'a>)> = Vec::new();
    let mut index = 0usize;
    for &p in &g.p {
        let prime = parse_prime(p)?;
        for &n_bound in &g.n_bound {
            for tau in &g.tau {
                for &precision in &g.precision {
                    let grid_index = index;
                    index += 1;
                    for &seed in seeds {
                        let mut key = vec![p.to_string(), tau.len().to_string(), n_bound.to_string()];
                        key.extend(padded(tau, width));
                        key.extend([
                            precision.to_string(),
                            seed.to_string(),
                            format!("{:?}", g.method).to_lowercase(),
                        ]);
                        let key_for_job = key.clone();
                        let job: Job<'a> = Box::new(move |ctx: &RunContext| {
                            count_row(g, prime, n_bound, tau, precision, seed, grid_index, ctx)
                                .unwrap_or_else(|e| failed_row(key_for_job.clone(), results.len(), &e))
                                .with_key(&key_for_job)
                        });
                        jobs.push((key, job));
                    }
                }
            }
        }
    }
    Ok((header, results.len(), jobs))
}

impl Row {
    /// Prefixes the identifying cells unless already present.
    fn with_key(mut self, key: &[String]) -> Row {
        if !self.values.starts_with(key) {
            let mut values = key.to_vec();
            values.append(&mut self.values);
            self.values = values;
        }
        self
    }
}

#[allow(clippy::too_many_arguments)]
fn count_row(
    g: &CountGrid,
    p: Prime,
    n_bound: u64,
    tau: &[crate::config::Rational],
    precision: usize,
    seed: u64,
    grid_index: usize,
    ctx: &RunContext,
) -> Result<Row, Error> {
    let x = random_point(p, tau.len(), precision, &mut rng_for(seed, grid_index))?;
    let profile = ApproxProfile::power_law(rationals(tau))?;
    let mut flags = Vec::new();
    let mut status = RowStatus::Ok;
    let tau_hat = match g.exponent {
        Some(s) => {
            let est = diophantine_exponent_estimate(
                &x,
                ExponentSchedule {
                    start_exp: s.start_exp,
                    end_exp: s.end_exp,
                },
                ctx.budget,
            )?;
            if est.truncated {
                flags.push("EXPONENT_TRUNCATED".to_string());
            }
            Some(est.tau_hat)
        }
        None => None,
    };
    let report = evaluate_bounds(&x, &profile, n_bound, g.eps, tau_hat, ctx.budget)?;
    if g.method != CountMethod::Fast {
        let brute = count_brute(&x, &profile, n_bound, ctx.budget)?;
        let sols = brute.solutions.as_deref().unwrap_or_default();
        if brute.count != report.count {
            status = RowStatus::InvariantViolation;
            flags.push(format!("FAST_BRUTE_MISMATCH brute={}", brute.count));
        }
        if !sols.iter().all(|s| is_member(s, &x, &brute.thresholds, n_bound)) {
            status = RowStatus::InvariantViolation;
            flags.push("NON_MEMBER_SOLUTION".to_string());
        }
    }
    let proof_ok = report.lower_proof.satisfied();
    if proof_ok == Some(false) || (ctx.inject_fault && proof_ok.is_some()) {
        status = RowStatus::InvariantViolation;
        flags.push("LOWER_PROOF_VIOLATED".to_string());
        if ctx.inject_fault {
            flags.push("INJECTED_FAULT".to_string());
        }
    }
    for (name, check) in [
        ("LOWER_STMT_FAIL", &report.lower_stmt),
        ("UPPER_C1_FAIL", &report.upper_c1),
        ("UPPER_EXPONENT_FAIL", &report.upper_exponent),
    ] {
        if check.satisfied() == Some(false) {
            flags.push(name.to_string());
        }
    }
    Ok(Row {
        values: vec![
            report.count.to_string(),
            bound_cell(&report.lower_proof),
            bound_cell(&report.lower_stmt),
            bound_cell(&report.upper_c1),
            bound_cell(&report.upper_exponent),
            tau_hat.map_or_else(String::new, |t| t.to_string()),
        ],
        status,
        flags,
    })
}

fn radius_name(r: RadiusChoice) -> &'static str {
    match r {
        RadiusChoice::Lambda1 => "lambda1",
        RadiusChoice::TwoLambda1 => "two_lambda1",
        RadiusChoice::SqrtNN => "sqrt_n_N",
    }
}

fn lattice_jobs<'a>(g: &'a LatticeGrid, seeds: &'a [u64]) -> Result<Jobs<'a>, String> {
    let width = g.tau.iter().map(Vec::len).max().unwrap_or(0);
    let mut header: Vec<String> = ["p", "n", "N"].map(String::from).to_vec();
    header.extend(numbered("tau", width));
    header.extend(["precision", "seed"].map(String::from));
    let mut results: Vec<String> = vec!["det".into()];
    results.extend(numbered("t", width));
    results.extend(numbered("lambda", width + 1));
    results.extend(["lambda1_upper", "lambda1_lower"].map(String::from));
    for &r in &g.radii {
        let name = radius_name(r);
        results.extend([format!("R2_{name}"), format!("points_{name}"), format!("geometry_{name}")]);
    }
    let result_width = results.len();
    header.extend(results);
    let mut jobs: Vec<(Vec<String>, Job<'a>)> = Vec::new();
    let mut index = 0usize;
    for &p in &g.p {
        let prime = parse_prime(p)?;
        for &n_bound in &g.n_bound {
            for tau in &g.tau {
                for &precision in &g.precision {
                    let grid_index = index;
                    index += 1;
                    for &seed in seeds {
                        let mut key = vec![p.to_string(), tau.len().to_string(), n_bound.to_string()];
                        key.extend(padded(tau, width));
                        key.extend([precision.to_string(), seed.to_string()]);
                        let k = key.clone();
                        let job: Job<'a> = Box::new(move |ctx: &RunContext| {
                            lattice_row(g, prime, n_bound, tau, precision, seed, grid_index, width, ctx)
                                .unwrap_or_else(|e| failed_row(k.clone(), result_width, &e))
                                .with_key(&k)
                        });
                        jobs.push((key, job));
                    }
                }
            }
        }
    }
    Ok((header, result_width, jobs))
}

#[allow(clippy::too_many_arguments)]
fn lattice_row(
    g: &LatticeGrid,
    p: Prime,
    n_bound: u64,
    tau: &[crate::config::Rational],
    precision: usize,
    seed: u64,
    grid_index: usize,
    width: usize,
    ctx: &RunContext,
) -> Result<Row, Error> {
    let x = random_point(p, tau.len(), precision, &mut rng_for(seed, grid_index))?;
    let profile = ApproxProfile::power_law(rationals(tau))?;
    let lattice = build_lattice(&x, &profile, n_bound)?;
    let minima = successive_minima(&lattice, ctx.budget)?;
    let lambda = check_lambda1_bounds(&lattice, &minima, &profile, n_bound, g.eps)?;
    let mut status = RowStatus::Ok;
    let mut flags = Vec::new();
    let mut violate = |flag: String, flags: &mut Vec<String>| {
        status = RowStatus::InvariantViolation;
        flags.push(flag);
    };
    if !lattice.det_bounds_hold(&profile, n_bound)? {
        violate("DET_BOUNDS_VIOLATED".into(), &mut flags);
    }
    for w in &minima.witnesses {
        let mut near = w.clone();
        near[0] += 1;
        if lattice.contains(w) != lattice.contains_by_basis(w)
            || lattice.contains(&near) != lattice.contains_by_basis(&near)
            || !lattice.contains(w)
        {
            violate("MEMBERSHIP_MISMATCH".into(), &mut flags);
        }
    }
    if !lambda.upper_ok {
        violate("LAMBDA1_UPPER_VIOLATED".into(), &mut flags);
    }
    if lambda.lower_ok == Some(false) {
        flags.push("LAMBDA1_LOWER_FAIL".into());
    }
    let mut values = vec![lattice.det().to_string()];
    values.extend(padded(lattice.thresholds(), width));
    values.extend(padded(&minima.lambda, width + 1));
    values.push(lambda.upper.to_string());
    values.push(lambda.lower.map_or_else(|| "NA".into(), |v| v.to_string()));
    for &r in &g.radii {
        let r2 = match r {
            RadiusChoice::Lambda1 => minima.lambda_sq[0],
            RadiusChoice::TwoLambda1 => 4 * minima.lambda_sq[0],
            RadiusChoice::SqrtNN => tau.len() as u128 * (n_bound as u128).pow(2),
        };
        values.push(r2.to_string());
        match verify_geometry(&lattice, &minima, r2, ctx.budget) {
            Ok(rep) => {
                values.push(rep.count.to_string());
                values.push(if rep.all_ok() { "ok" } else { "FAIL" }.into());
                if !rep.all_ok() {
                    violate(format!("GEOMETRY_VIOLATED_{}", radius_name(r)), &mut flags);
                }
            }
            Err(Error::InfeasibleSize { .. }) => {
                values.push(String::new());
                values.push("over budget".into());
                flags.push(format!("ENUMERATION_SKIPPED_{}", radius_name(r)));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Row { values, status, flags })
}

fn dimension_jobs<'a>(g: &'a DimensionGrid, seeds: &'a [u64]) -> Result<Jobs<'a>, String> {
    let dw = g.tau_d.iter().map(Vec::len).max().unwrap_or(0);
    let mw = g.tau_m.iter().map(Vec::len).max().unwrap_or(0);
    let mut header: Vec<String> = ["n", "d", "m"].map(String::from).to_vec();
    header.extend(numbered("tau_d", dw));
    header.extend(numbered("tau_m", mw));
    header.push("seed".into());
    let mut results: Vec<String> = vec!["valid".into(), "s_formula".into(), "s_mtprr".into()];
    results.extend(numbered("v", dw));
    results.push("s_empirical".into());
    let result_width = results.len();
    header.extend(results);
    // without an empirical stage the computation is deterministic: one row
    let run_seeds: Vec<Option<u64>> = match g.empirical {
        Some(_) => seeds.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let mut jobs: Vec<(Vec<String>, Job<'a>)> = Vec::new();
    let mut index = 0usize;
    for td in &g.tau_d {
        for tm in &g.tau_m {
            let grid_index = index;
            index += 1;
            for &seed in &run_seeds {
                let mut key = vec![
                    (td.len() + tm.len()).to_string(),
                    td.len().to_string(),
                    tm.len().to_string(),
                ];
                key.extend(padded(td, dw));
                key.extend(padded(tm, mw));
                key.push(seed.map_or_else(String::new, |s| s.to_string()));
                let k = key.clone();
                let job: Job<'a> = Box::new(move |ctx: &RunContext| {
                    dimension_row(g, td, tm, seed, grid_index, dw, ctx)
                        .unwrap_or_else(|e| failed_row(k.clone(), result_width, &e))
                        .with_key(&k)
                });
                jobs.push((key, job));
            }
        }
    }
    Ok((header, result_width, jobs))
}

fn dimension_row(
    g: &DimensionGrid,
    td: &[crate::config::Rational],
    tm: &[crate::config::Rational],
    seed: Option<u64>,
    grid_index: usize,
    dw: usize,
    ctx: &RunContext,
) -> Result<Row, Error> {
    let split: WeightSplit<BigRational> = WeightSplit::new(rationals(td), rationals(tm))?;
    if let Err(e) = split.validate() {
        let mut values = vec!["false".to_string(), String::new(), String::new()];
        values.extend(std::iter::repeat_n(String::new(), dw + 1));
        return Ok(Row {
            values,
            status: RowStatus::ConstraintViolation,
            flags: vec![e.to_string()],
        });
    }
    let formula = theorem2_dimension(&split)?;
    let mut status = RowStatus::Ok;
    let mut flags = Vec::new();
    let vv = v_vector(split.sorted_tau_d(), split.budget());
    let (mtprr, v_cells) = match vv {
        Ok(vv) => {
            let mut v = vec![BigRational::default(); split.d()];
            for (sorted_idx, &orig) in split.permutation().iter().enumerate() {
                v[orig] = vv.v[sorted_idx].clone();
            }
            let s = mtprr_dimension(&split)?;
            if s != formula {
                status = RowStatus::InvariantViolation;
                flags.push("FORMULA_MTPRR_MISMATCH".into());
            }
            (s.to_string(), padded(&v, dw))
        }
        Err(e) => {
            flags.push(e.to_string());
            (String::new(), padded::<String>(&[], dw))
        }
    };
    let empirical = match (&g.empirical, seed) {
        (Some(emp), Some(seed)) => {
            let p = Prime::new(emp.p)?;
            let alpha = random_point(p, split.m(), emp.precision, &mut rng_for(seed, grid_index))?;
            let est = cover_critical_exponent(&alpha, &split, emp.k_max, emp.fit_from, ctx.budget)?;
            if est.no_resonant_denominators {
                flags.push("NO_RESONANT_DENOMINATORS".into());
            }
            est.s.map_or_else(String::new, |s| s.to_string())
        }
        _ => String::new(),
    };
    let mut values = vec!["true".to_string(), formula.to_string(), mtprr];
    values.extend(v_cells);
    values.push(empirical);
    Ok(Row { values, status, flags })
}

fn ubiquity_jobs<'a>(g: &'a UbiquityGrid, seeds: &'a [u64]) -> Result<Jobs<'a>, String> {
    let dw = g.tau_d.iter().map(Vec::len).max().unwrap_or(0);
    let mw = g.tau_m.iter().map(Vec::len).max().unwrap_or(0);
    let mut header: Vec<String> = ["p", "d", "m"].map(String::from).to_vec();
    header.extend(numbered("tau_d", dw));
    header.extend(numbered("tau_m", mw));
    header.extend(["M", "k", "ball", "precision", "seed"].map(String::from));
    let results = ["members", "balls", "density", "density_exact", "c", "pass"];
    header.extend(results.map(String::from));
    let mut jobs: Vec<(Vec<String>, Job<'a>)> = Vec::new();
    let mut index = 0usize;
    for &p in &g.p {
        let prime = parse_prime(p)?;
        for td in &g.tau_d {
            for tm in &g.tau_m {
                for &m_param in &g.m_param {
                    for &k in &g.k {
                        for ball in &g.ball {
                            for &precision in &g.precision {
                                let grid_index = index;
                                index += 1;
                                for &seed in seeds {
                                    let mut key = vec![p.to_string(), td.len().to_string(), tm.len().to_string()];
                                    key.extend(padded(td, dw));
                                    key.extend(padded(tm, mw));
                                    let ball_text = match ball {
                                        None => "full".to_string(),
                                        Some(b) => format!("{:?}@{:?}", b.levels, b.center),
                                    };
                                    key.extend([
                                        m_param.to_string(),
                                        k.to_string(),
                                        ball_text,
                                        precision.to_string(),
                                        seed.to_string(),
                                    ]);
                                    let kk = key.clone();
                                    let job: Job<'a> = Box::new(move |ctx: &RunContext| {
                                        ubiquity_row(prime, td, tm, m_param, k, ball.as_ref(), precision, seed, grid_index, ctx)
                                            .unwrap_or_else(|e| failed_row(kk.clone(), results.len(), &e))
                                            .with_key(&kk)
                                    });
                                    jobs.push((key, job));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok((header, results.len(), jobs))
}

#[allow(clippy::too_many_arguments)]
fn ubiquity_row(
    p: Prime,
    td: &[crate::config::Rational],
    tm: &[crate::config::Rational],
    m_param: u64,
    k: u32,
    ball: Option<&crate::config::BallSpec>,
    precision: usize,
    seed: u64,
    grid_index: usize,
    ctx: &RunContext,
) -> Result<Row, Error> {
    let split = WeightSplit::new(rationals(td), rationals(tm))?;
    let ball = match ball {
        Some(b) => Ball::new(p, b.levels.clone(), b.center.clone())?,
        None => Ball::full(p, split.d()),
    };
    let alpha = random_point(p, split.m(), precision, &mut rng_for(seed, grid_index))?;
    let rep = ubiquity_density_check(&alpha, &split, m_param, k, &ball, ctx.budget)?;
    let flags = if rep.pass { Vec::new() } else { vec!["DENSITY_BELOW_C".to_string()] };
    Ok(Row {
        values: vec![
            rep.members.to_string(),
            rep.balls.to_string(),
            rep.density.to_string(),
            rep.density_exact,
            rep.c.to_string(),
            rep.pass.to_string(),
        ],
        status: RowStatus::Ok,
        flags,
    })
}

fn exponent_jobs<'a>(g: &'a ExponentGrid, seeds: &'a [u64]) -> Result<Jobs<'a>, String> {
    let mut header: Vec<String> = ["p", "n", "start_exp", "end_exp", "precision", "seed"]
        .map(String::from)
        .to_vec();
    let results = ["tau_hat", "truncated", "unbounded", "precision_cap"];
    header.extend(results.map(String::from));
    let mut jobs: Vec<(Vec<String>, Job<'a>)> = Vec::new();
    let mut index = 0usize;
    for &p in &g.p {
        let prime = parse_prime(p)?;
        for &n in &g.n {
            for &start_exp in &g.start_exp {
                for &end_exp in &g.end_exp {
                    for &precision in &g.precision {
                        let grid_index = index;
                        index += 1;
                        for &seed in seeds {
                            let key: Vec<String> = vec![
                                p.to_string(),
                                n.to_string(),
                                start_exp.to_string(),
                                end_exp.to_string(),
                                precision.to_string(),
                                seed.to_string(),
                            ];
                            let k = key.clone();
                            let job: Job<'a> = Box::new(move |ctx: &RunContext| {
                                exponent_row(prime, n, start_exp, end_exp, precision, seed, grid_index, ctx.budget)
                                    .unwrap_or_else(|e| failed_row(k.clone(), results.len(), &e))
                                    .with_key(&k)
                            });
                            jobs.push((key, job));
                        }
                    }
                }
            }
        }
    }
    Ok((header, results.len(), jobs))
}

#[allow(clippy::too_many_arguments)]
fn exponent_row(
    p: Prime,
    n: usize,
    start_exp: u32,
    end_exp: u32,
    precision: usize,
    seed: u64,
    grid_index: usize,
    budget: Budget,
) -> Result<Row, Error> {
    let x = random_point(p, n, precision, &mut rng_for(seed, grid_index))?;
    let est = diophantine_exponent_estimate(&x, ExponentSchedule { start_exp, end_exp }, budget)?;
    let mut flags = Vec::new();
    if est.truncated {
        flags.push("TRUNCATED".to_string());
    }
    if est.unbounded {
        flags.push("UNBOUNDED".to_string());
    }
    Ok(Row {
        values: vec![
            est.tau_hat.to_string(),
            est.truncated.to_string(),
            est.unbounded.to_string(),
            est.precision_cap.to_string(),
        ],
        status: RowStatus::Ok,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Subcommand;

    fn ctx() -> RunContext {
        RunContext {
            budget: Budget::default(),
            deadline: None,
            inject_fault: false,
        }
    }

    fn run_text(text: &str, sub: Subcommand) -> RunOutput {
        let cfg = ExperimentConfig::parse(text, sub).unwrap();
        run(&cfg, ctx(), Some(2)).unwrap()
    }

    #[test]
    fn count_rows_in_canonical_order() {
        let out = run_text(
            r#"{"grid": {"p": [2], "N": [64, 128], "tau": [["3/2"]], "method": "both"}, "seeds": [5, 6]}"#,
            Subcommand::Count,
        );
        assert_eq!(out.rows.len(), 4);
        let keys: Vec<(String, String)> = out.rows.iter().map(|r| (r.values[2].clone(), r.values[5].clone())).collect();
        assert_eq!(
            keys,
            [("64", "5"), ("64", "6"), ("128", "5"), ("128", "6")].map(|(a, b)| (a.to_string(), b.to_string()))
        );
        assert!(out.rows.iter().all(|r| r.values.len() == out.header.len()));
        assert_eq!(out.exit_code(), 0);
    }

    #[test]
    fn budget_exhaustion_gives_timeout_rows() {
        let cfg = ExperimentConfig::parse(
            r#"{"grid": {"p": [2], "N": [1000], "tau": [["3/2"]], "method": "brute"}}"#,
            Subcommand::Count,
        )
        .unwrap();
        let out = run(
            &cfg,
            RunContext {
                budget: Budget::new(10),
                ..ctx()
            },
            None,
        )
        .unwrap();
        assert_eq!(out.rows[0].status, RowStatus::Timeout);
        assert_eq!(out.rows[0].values.len(), out.header.len());
        assert_eq!(out.exit_code(), 0);
    }

    #[test]
    fn injected_fault_is_an_invariant_violation() {
        let cfg = ExperimentConfig::parse(
            r#"{"grid": {"p": [2], "N": [64], "tau": [["3/2"]]}, "inject_fault": true}"#,
            Subcommand::Count,
        )
        .unwrap();
        let out = run(
            &cfg,
            RunContext {
                inject_fault: cfg.inject_fault,
                ..ctx()
            },
            None,
        )
        .unwrap();
        assert_eq!(out.rows[0].status, RowStatus::InvariantViolation);
        assert_eq!(out.exit_code(), 2);
    }

    #[test]
    fn invalid_split_is_reported_not_fatal() {
        let out = run_text(
            r#"{"grid": {"tau_d": [["2.0", "1.2"]], "tau_m": [["1.4"], ["2.5"]]}}"#,
            Subcommand::Dimension,
        );
        assert_eq!(out.rows.len(), 2);
        assert_eq!(out.rows[0].status, RowStatus::Ok);
        let s_formula = out.header.iter().position(|h| h == "s_formula").unwrap();
        assert_eq!(out.rows[0].values[s_formula], "17/10");
        assert_eq!(out.rows[1].status, RowStatus::ConstraintViolation);
        assert_eq!(out.exit_code(), 0);
    }

    #[test]
    fn lattice_and_ubiquity_rows() {
        let out = run_text(
            r#"{"grid": {"p": [2, 3], "N": [32], "tau": [["3/2"], ["1.2", "1.3"]]}, "seeds": [1]}"#,
            Subcommand::Lattice,
        );
        assert_eq!(out.rows.len(), 4);
        assert!(out.rows.iter().all(|r| r.status == RowStatus::Ok), "{:?}", out.rows);
        let out = run_text(
            r#"{"grid": {"p": [2], "tau_d": [["2.5"]], "tau_m": [["1.4"]], "M": [13], "k": [1]}, "seeds": [1]}"#,
            Subcommand::Ubiquity,
        );
        assert_eq!(out.rows[0].status, RowStatus::Ok);
        let out = run_text(
            r#"{"grid": {"p": [2], "tau_d": [["2.5"]], "tau_m": [["1.4"]], "M": [12], "k": [1]}}"#,
            Subcommand::Ubiquity,
        );
        assert_eq!(out.rows[0].status, RowStatus::ConstraintViolation);
    }

    #[test]
    fn csv_is_independent_of_thread_count() {
        let text = r#"{"grid": {"p": [2, 3], "n": [1, 2], "start_exp": [4], "end_exp": [12]}, "seeds": [1, 2, 3]}"#;
        let cfg = ExperimentConfig::parse(text, Subcommand::Exponent).unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        run(&cfg, ctx(), Some(1)).unwrap().write_csv(&mut a).unwrap();
        run(&cfg, ctx(), Some(4)).unwrap().write_csv(&mut b).unwrap();
        assert_eq!(a, b);
        assert_eq!(String::from_utf8(a).unwrap().lines().count(), 13);
    }
}

//! Acceptance suite. Each test prints one `PASS`/`FAIL` line for its
//! criterion (written straight to stdout so it survives output capture) and
//! fails the test on `FAIL`. Tolerances and time limits are pinned below.

use std::io::Write;
use std::time::{Duration, Instant};

use causal_bounds::bounds::{
    check_compatibility, closed_form_lambda_min, degenerate_compatibility, is_feasible,
    lp_lambda_extremes, tightened_pns_bounds, DegeneracyProfile,
};
use causal_bounds::info::{
    conditional_outcome_entropy, falsify_by_conditional_info, falsify_by_marginal_info, h2,
    info_report, mutual_information, noise_outcome_information_enumerated,
    treatment_outcome_information,
};
use causal_bounds::maxent::{maxent_lambda_single, maxent_scm, rank_evidence};
use causal_bounds::oracle::{abduction_oracle, grid_max_entropy, reduce, GridSpec, Query};
use causal_bounds::polytope::{bivariate, N_FUNCTIONS};
use causal_bounds::scm::{
    lambda_range, pns_bounds_single, pns_from_lambda, prob_necessary_nonmonotonicity,
    prob_sufficient_nonmonotonicity, response_weights,
};
use causal_bounds::sweep::{
    entropy_means, run_sweep, FixedMarginal, Range, SweepConfig, SweepOutput,
};
use causal_bounds::{build_polytope, BinaryMarginal, Error, TrivariateTable, UnivariateFn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const EXACT_TOL: f64 = 1e-12;
const LP_TOL: f64 = 1e-9;
const SINGLE_MAXENT_TOL: f64 = 1e-6;
const SINGLE_MAXENT_STEP: f64 = 1e-6;
const GRID_ENTROPY_TOL: f64 = 2e-3;
const GRID_RESOLUTION: u32 = 1000;
const RANKING_TOL: f64 = 1e-9;
const NORMALIZED_TOL: f64 = 1e-9;

const EXAMPLE_TIME: Duration = Duration::from_millis(1);
const CLOSED_FORM_TIME: Duration = Duration::from_secs(30);
const SWEEP_TIME: Duration = Duration::from_secs(300);

fn report(id: u32, title: &str, outcome: Result<String, String>) {
    let line = match &outcome {
        Ok(detail) => format!("PASS [{id:02}] {title}: {detail}\n"),
        Err(detail) => format!("FAIL [{id:02}] {title}: {detail}\n"),
    };
    // the harness captures `print!`; write to the process's stdout directly
    match std::fs::OpenOptions::new().append(true).open("/dev/stdout") {
        Ok(mut f) => f.write_all(line.as_bytes()).unwrap(),
        Err(_) => print!("{line}"),
    }
    if let Err(detail) = outcome {
        panic!("criterion {id} failed: {detail}");
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn marg(p00: f64, p01: f64, pw0: f64) -> BinaryMarginal {
    BinaryMarginal::new(p00, p01, pw0).unwrap()
}

/// Conditional in [0, 1], landing exactly on 0 or 1 about one time in ten.
fn conditional(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..20) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.gen(),
    }
}

fn random_marginal(rng: &mut ChaCha8Rng) -> BinaryMarginal {
    marg(
        conditional(rng),
        conditional(rng),
        rng.gen_range(0.02..0.98),
    )
}

fn random_interior_marginal(rng: &mut ChaCha8Rng) -> BinaryMarginal {
    marg(
        rng.gen_range(0.02..0.98),
        rng.gen_range(0.02..0.98),
        rng.gen_range(0.05..0.95),
    )
}

fn random_lambda(rng: &mut ChaCha8Rng, m: &BinaryMarginal) -> f64 {
    let r = lambda_range(m);
    match rng.gen_range(0..10) {
        0 => r.lo,
        1 => r.hi,
        _ => rng.gen_range(r.lo..=r.hi),
    }
}

/// The four ways `P(Y, Z)` can be degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DegenerateCase {
    P00Zero,
    P01Zero,
    P00One,
    P01One,
}

const CASES: [DegenerateCase; 4] = [
    DegenerateCase::P00Zero,
    DegenerateCase::P01Zero,
    DegenerateCase::P00One,
    DegenerateCase::P01One,
];

/// A degenerate `P(Y, Z)` whose outcome marginal matches `p_z0`. `None` when
/// the case cannot reproduce `p_z0` with `P(Y=0)` away from 0 and 1.
fn degenerate_partner(
    rng: &mut ChaCha8Rng,
    p_z0: f64,
    case: DegenerateCase,
) -> Option<BinaryMarginal> {
    const EDGE: f64 = 0.02;
    let (lo, hi) = match case {
        DegenerateCase::P01Zero => (p_z0, 1.0),
        DegenerateCase::P00Zero => (0.0, 1.0 - p_z0),
        DegenerateCase::P00One => (0.0, p_z0),
        DegenerateCase::P01One => (1.0 - p_z0, 1.0),
    };
    let (lo, hi) = (lo.max(EDGE), hi.min(1.0 - EDGE));
    if hi - lo < 1e-3 {
        return None;
    }
    let py0 = rng.gen_range(lo..hi);
    let (a, b) = match case {
        DegenerateCase::P01Zero => (p_z0 / py0, 0.0),
        DegenerateCase::P00Zero => (0.0, p_z0 / (1.0 - py0)),
        DegenerateCase::P00One => (1.0, (p_z0 - py0) / (1.0 - py0)),
        DegenerateCase::P01One => ((p_z0 - 1.0 + py0) / py0, 1.0),
    };
    Some(marg(a.clamp(0.0, 1.0), b.clamp(0.0, 1.0), py0))
}

fn case_of(my: &BinaryMarginal) -> DegenerateCase {
    let p = DegeneracyProfile::of(my);
    if p.p00_is_0 {
        DegenerateCase::P00Zero
    } else if p.p01_is_0 {
        DegenerateCase::P01Zero
    } else if p.p00_is_1 {
        DegenerateCase::P00One
    } else {
        DegenerateCase::P01One
    }
}

/// Degenerate instances cycling through the four cases. With `mixed`, about a
/// third get a random `P(Y=0)` instead of a matching outcome marginal.
fn degenerate_instances(seed: u64, n: usize, mixed: bool) -> Vec<(BinaryMarginal, BinaryMarginal)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let case = CASES[out.len() % 4];
        let mx = random_interior_marginal(&mut rng);
        if mixed && rng.gen_range(0..3) == 0 {
            let free: f64 = rng.gen();
            let py0 = rng.gen_range(0.05..0.95);
            let my = match case {
                DegenerateCase::P00Zero => marg(0.0, free, py0),
                DegenerateCase::P01Zero => marg(free, 0.0, py0),
                DegenerateCase::P00One => marg(1.0, free, py0),
                DegenerateCase::P01One => marg(free, 1.0, py0),
            };
            out.push((mx, my));
        } else if let Some(my) = degenerate_partner(&mut rng, mx.p_z0(), case) {
            out.push((mx, my));
        }
    }
    out
}

/// Compatible degenerate instances, equally many per case.
fn compatible_degenerate_instances(seed: u64, n: usize) -> Vec<(BinaryMarginal, BinaryMarginal)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let case = CASES[out.len() % 4];
        let mx = random_interior_marginal(&mut rng);
        let Some(my) = degenerate_partner(&mut rng, mx.p_z0(), case) else {
            continue;
        };
        if check_compatibility(&mx, &my).unwrap().compatible {
            out.push((mx, my));
        }
    }
    out
}

/// `sum_n P(n) I(X:Z | N=n)` for `Z = f_n(X)`, by direct enumeration.
fn conditional_info_enumerated(m: &BinaryMarginal, lambda: f64) -> f64 {
    let a = response_weights(m, lambda).unwrap();
    let px = [m.p_w0(), m.p_w1()];
    UnivariateFn::ALL
        .iter()
        .map(|&f| {
            let mut joint = [[0.0; 2]; 2];
            for x in 0..2u8 {
                joint[x as usize][f.eval(x) as usize] += px[x as usize];
            }
            a.get(f) * mutual_information(&joint)
        })
        .sum()
}

#[test]
fn criterion_01_information_at_extreme_lambdas() {
    let outcome = (|| {
        let m = marg(0.5, 0.5, 0.5);
        let start = Instant::now();
        let hi = info_report(&m, 0.5).map_err(|e| e.to_string())?;
        let lo = info_report(&m, 0.0).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        for (r, lambda, want) in [(hi, 0.5, (1.0, 0.0)), (lo, 0.0, (0.0, 1.0))] {
            check(
                (r.i_nz_z - want.0).abs() <= EXACT_TOL
                    && (r.i_xz_given_nz - want.1).abs() <= EXACT_TOL,
                || format!("lambda {lambda}: got ({}, {})", r.i_nz_z, r.i_xz_given_nz),
            )?;
            let enumerated = (
                noise_outcome_information_enumerated(&m, lambda).unwrap(),
                conditional_info_enumerated(&m, lambda),
            );
            check(
                (enumerated.0 - want.0).abs() <= EXACT_TOL
                    && (enumerated.1 - want.1).abs() <= EXACT_TOL,
                || format!("lambda {lambda}: enumeration gives {enumerated:?}"),
            )?;
        }
        check(elapsed < EXAMPLE_TIME, || format!("took {elapsed:?}"))?;
        Ok(format!("(1, 0) and (0, 1) bits in {elapsed:?}"))
    })();
    report(1, "information values at lambda = 0.5 and 0", outcome);
}

#[test]
fn criterion_02_pns_bounds_are_the_mapped_lambda_interval() {
    let outcome = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut worst: f64 = 0.0;
        for _ in 0..10_000 {
            let m = random_marginal(&mut rng);
            let r = lambda_range(&m);
            let b = pns_bounds_single(&m);
            let err = (b.lo - (m.p00() - r.hi))
                .abs()
                .max((b.hi - (m.p00() - r.lo)).abs());
            worst = worst.max(err);
            check(err <= EXACT_TOL, || format!("{m:?}: {b:?} vs {r:?}"))?;
        }
        Ok(format!("10000 marginals, max error {worst:e}"))
    })();
    report(
        2,
        "single-marginal PNS bounds equal the mapped lambda range",
        outcome,
    );
}

#[test]
fn criterion_03_closed_form_matches_lp_minimum() {
    let outcome = (|| {
        let start = Instant::now();
        let instances = compatible_degenerate_instances(3, 1000);
        let mut per_case = [0usize; 4];
        let mut worst: f64 = 0.0;
        for (mx, my) in &instances {
            per_case[CASES.iter().position(|c| *c == case_of(my)).unwrap()] += 1;
            let closed = closed_form_lambda_min(mx, my).map_err(|e| e.to_string())?;
            let lp = lp_lambda_extremes(&build_polytope(mx, my))
                .map_err(|e| format!("{mx:?} {my:?}: {e}"))?;
            worst = worst.max((closed - lp.lo).abs());
            check((closed - lp.lo).abs() <= LP_TOL, || {
                format!("{mx:?} {my:?}: closed form {closed} vs LP {}", lp.lo)
            })?;
        }
        check(per_case.iter().all(|&n| n > 0), || {
            format!("case counts {per_case:?}")
        })?;

        let t = tightened_pns_bounds(&marg(0.5, 0.4, 0.5), &marg(0.75, 0.0, 0.6))
            .map_err(|e| e.to_string())?;
        let single = pns_bounds_single(&marg(0.5, 0.4, 0.5));
        check(
            (t.pns.lo - 0.1).abs() <= LP_TOL && (t.pns.hi - 0.2).abs() <= LP_TOL,
            || format!("worked fixture gives {:?}", t.pns),
        )?;
        check(
            (single.lo - 0.1).abs() <= LP_TOL && (single.hi - 0.5).abs() <= LP_TOL,
            || format!("single-marginal fixture gives {single:?}"),
        )?;
        let elapsed = start.elapsed();
        check(elapsed < CLOSED_FORM_TIME, || format!("took {elapsed:?}"))?;
        Ok(format!(
            "1000 instances, cases {per_case:?}, max error {worst:e}, fixture [0.1, 0.5] -> [0.1, 0.2], {elapsed:?}"
        ))
    })();
    report(
        3,
        "closed-form lower bound on lambda equals the LP minimum",
        outcome,
    );
}

#[test]
fn criterion_04_certificate_agrees_with_lp_feasibility() {
    let outcome = (|| {
        let instances = degenerate_instances(4, 1000, true);
        let mut compatible = 0;
        for (mx, my) in &instances {
            let cert = degenerate_compatibility(mx, my).map_err(|e| e.to_string())?;
            let lp = is_feasible(&build_polytope(mx, my)).map_err(|e| e.to_string())?;
            check(cert.compatible == lp, || {
                format!("{mx:?} {my:?}: certificate {} vs LP {lp}", cert.compatible)
            })?;
            compatible += usize::from(lp);
        }
        check(compatible > 0 && compatible < instances.len(), || {
            format!("suite is not mixed: {compatible} compatible")
        })?;
        Ok(format!(
            "1000 instances ({compatible} compatible, {} incompatible), 100% agreement",
            1000 - compatible
        ))
    })();
    report(
        4,
        "compatibility certificate agrees with LP feasibility",
        outcome,
    );
}

#[test]
fn criterion_05_upper_bound_is_never_tightened() {
    let outcome = (|| {
        let mut instances = compatible_degenerate_instances(3, 1000);
        instances.extend(degenerate_instances(4, 1000, true));
        let mut feasible = 0;
        let mut worst: f64 = 0.0;
        for (mx, my) in &instances {
            let spec = build_polytope(mx, my);
            match lp_lambda_extremes(&spec) {
                Ok(iv) => {
                    feasible += 1;
                    let want = mx.p00().min(mx.p01());
                    worst = worst.max((iv.hi - want).abs());
                    check((iv.hi - want).abs() <= LP_TOL, || {
                        format!("{mx:?} {my:?}: LP max {} vs {want}", iv.hi)
                    })?;
                }
                Err(Error::Infeasible) => {}
                Err(e) => return Err(e.to_string()),
            }
        }
        Ok(format!(
            "{feasible} feasible instances, max error {worst:e}"
        ))
    })();
    report(
        5,
        "LP maximum of lambda equals the single-marginal maximum",
        outcome,
    );
}

#[test]
fn criterion_06_information_two_path_identity() {
    let outcome = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut worst: f64 = 0.0;
        for _ in 0..10_000 {
            let m = random_marginal(&mut rng);
            let lambda = random_lambda(&mut rng, &m);
            let closed = h2(m.p_z0()) - h2(m.p_w0()) * (m.p00() + m.p01() - 2.0 * lambda);
            let enumerated = noise_outcome_information_enumerated(&m, lambda).unwrap();
            let library = info_report(&m, lambda).unwrap().i_nz_z;
            let err = (closed - enumerated)
                .abs()
                .max((library - enumerated).abs());
            worst = worst.max(err);
            check(err <= EXACT_TOL, || {
                format!("{m:?} lambda {lambda}: closed {closed}, library {library}, enumerated {enumerated}")
            })?;
        }
        Ok(format!("10000 (m, lambda) pairs, max error {worst:e}"))
    })();
    report(
        6,
        "closed-form and enumerated noise-outcome information agree",
        outcome,
    );
}

#[test]
fn criterion_07_information_containment() {
    let outcome = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10_000 {
            let m = random_marginal(&mut rng);
            let lambda = random_lambda(&mut rng, &m);
            let r = info_report(&m, lambda).unwrap();
            let h_z_given_x = conditional_outcome_entropy(&m);
            let i_xz = treatment_outcome_information(&m);
            let h_x = h2(m.p_w0());
            check(
                r.i_nz_z >= -EXACT_TOL && r.i_nz_z <= h_z_given_x + EXACT_TOL,
                || {
                    format!(
                        "{m:?} lambda {lambda}: I(N:Z) = {} outside [0, {h_z_given_x}]",
                        r.i_nz_z
                    )
                },
            )?;
            check(
                r.i_xz_given_nz >= i_xz - EXACT_TOL && r.i_xz_given_nz <= h_x + EXACT_TOL,
                || {
                    format!(
                        "{m:?} lambda {lambda}: I(X:Z|N) = {} outside [{i_xz}, {h_x}]",
                        r.i_xz_given_nz
                    )
                },
            )?;
        }
        Ok("10000 (m, lambda) pairs inside both intervals".into())
    })();
    report(
        7,
        "information quantities stay inside their intervals",
        outcome,
    );
}

/// A joint model `Z = h_U(X, Y)` with `U ~ c`, `X` and `Y` independent.
struct JointModel {
    c: [f64; N_FUNCTIONS],
    px0: f64,
    py0: f64,
}

impl JointModel {
    fn sample(rng: &mut ChaCha8Rng) -> Self {
        let mut c = [0.0; N_FUNCTIONS];
        // sparse supports reach the corners of the polytope
        let support = rng.gen_range(1..=N_FUNCTIONS);
        for _ in 0..support {
            c[rng.gen_range(0..N_FUNCTIONS)] += -rng.gen::<f64>().max(1e-300).ln();
        }
        let total: f64 = c.iter().sum();
        c.iter_mut().for_each(|v| *v /= total);
        Self {
            c,
            px0: rng.gen_range(0.05..0.95),
            py0: rng.gen_range(0.05..0.95),
        }
    }

    fn table(&self) -> [[[f64; 2]; 2]; 2] {
        let px = [self.px0, 1.0 - self.px0];
        let py = [self.py0, 1.0 - self.py0];
        let mut p = [[[0.0; 2]; 2]; 2];
        for (k, &ck) in self.c.iter().enumerate() {
            for x in 0..2u8 {
                for y in 0..2u8 {
                    let z = bivariate(k, x, y) as usize;
                    p[x as usize][y as usize][z] += ck * px[x as usize] * py[y as usize];
                }
            }
        }
        p
    }

    fn marginal(&self, axis_x: bool) -> BinaryMarginal {
        let p = self.table();
        let mut joint = [[0.0; 2]; 2];
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    let w = if axis_x { x } else { y };
                    joint[w][z] += p[x][y][z];
                }
            }
        }
        let arm = |w: usize| joint[w][0] / (joint[w][0] + joint[w][1]);
        marg(arm(0), arm(1), joint[0][0] + joint[0][1])
    }

    /// `P(N_Z = f) = P(x -> h_U(x, Y) is f)`, where `N_Z` is the noise of the
    /// `X -> Z` model and absorbs both `U` and `Y`.
    fn lambda_x(&self) -> f64 {
        let py = [self.py0, 1.0 - self.py0];
        let mut zero = 0.0;
        for (k, &ck) in self.c.iter().enumerate() {
            for y in 0..2u8 {
                if bivariate(k, 0, y) == 0 && bivariate(k, 1, y) == 0 {
                    zero += ck * py[y as usize];
                }
            }
        }
        zero
    }
}

#[test]
fn criterion_08_true_hypotheses_survive_and_false_ones_fall() {
    let outcome = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut constructed = 0;
        for i in 0..1000 {
            let model = JointModel::sample(&mut rng);
            let mx = model.marginal(true);
            let my = model.marginal(false);
            let lambda = lambda_range(&mx)
                .admit(model.lambda_x())
                .map_err(|e| e.to_string())?;
            let truth = info_report(&mx, lambda).map_err(|e| e.to_string())?;
            let table = TrivariateTable::new(model.table()).map_err(|e| e.to_string())?;

            let marginal = falsify_by_marginal_info(truth.i_nz_z.max(0.0), &my).unwrap();
            let conditional =
                falsify_by_conditional_info(truth.i_xz_given_nz.max(0.0), &table).unwrap();
            check(!marginal.falsified && !conditional.falsified, || {
                format!("sample {i}: false positive {marginal:?} {conditional:?}")
            })?;

            // lowering a hypothesis below what the data show must be caught
            for (v, falsify) in [(marginal.observed, 0usize), (conditional.observed, 1usize)] {
                if v > 0.01 {
                    constructed += 1;
                    let hyp = v - 0.01;
                    let verdict = if falsify == 0 {
                        falsify_by_marginal_info(hyp, &my).unwrap()
                    } else {
                        falsify_by_conditional_info(hyp, &table).unwrap()
                    };
                    check(verdict.falsified, || {
                        format!("sample {i}: false negative {verdict:?}")
                    })?;
                }
            }
        }

        let deterministic = marg(1.0, 0.0, 0.5);
        check(
            falsify_by_marginal_info(0.5, &deterministic)
                .unwrap()
                .falsified,
            || "deterministic partner not falsified".into(),
        )?;
        let xor =
            TrivariateTable::new([[[0.25, 0.0], [0.0, 0.25]], [[0.0, 0.25], [0.25, 0.0]]]).unwrap();
        check(
            falsify_by_conditional_info(0.5, &xor).unwrap().falsified,
            || "xor table not falsified".into(),
        )?;
        Ok(format!(
            "1000 joint models, 0 false positives; {} constructed violations plus 2 fixtures, 0 false negatives",
            constructed
        ))
    })();
    report(
        8,
        "information falsification has no false positives or negatives",
        outcome,
    );
}

/// Grid argmax of the univariate entropy over the lambda interval.
fn grid_argmax(m: &BinaryMarginal, step: f64) -> f64 {
    let r = lambda_range(m);
    let n = (r.width() / step).ceil() as usize;
    let mut best = (r.lo, f64::NEG_INFINITY);
    for i in 0..=n {
        let l = (r.lo + step * i as f64).min(r.hi);
        let a = [l, 1.0 - m.p00() - m.p01() + l, m.p00() - l, m.p01() - l];
        let h: f64 = a.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum();
        if h > best.1 {
            best = (l, h);
        }
    }
    best.0
}

/// Two-marginal fixtures with at most two free coordinates after elimination.
fn low_dimensional_fixtures() -> Vec<(BinaryMarginal, BinaryMarginal)> {
    let mut out = vec![
        (marg(0.5, 0.4, 0.5), marg(0.75, 0.0, 0.6)),
        (marg(0.5, 0.5, 0.5), marg(1.0, 0.0, 0.5)),
    ];
    for (mx, my) in compatible_degenerate_instances(9, 400) {
        if out.len() >= 24 {
            break;
        }
        if reduce(&build_polytope(&mx, &my)).is_ok_and(|r| r.free.len() <= 2) {
            out.push((mx, my));
        }
    }
    out
}

#[test]
fn criterion_09_maxent_matches_grid_search() {
    let outcome = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let marginals: Vec<BinaryMarginal> = (0..100)
            .map(|_| random_interior_marginal(&mut rng))
            .collect();
        let worst = marginals
            .par_iter()
            .map(|m| {
                let est = maxent_lambda_single(m).value();
                let grid = grid_argmax(m, SINGLE_MAXENT_STEP);
                ((est - m.p00() * m.p01()).abs().max((est - grid).abs()), *m)
            })
            .reduce(
                || (0.0, marg(0.5, 0.5, 0.5)),
                |a, b| if a.0 >= b.0 { a } else { b },
            );
        check(worst.0 <= SINGLE_MAXENT_TOL, || {
            format!("single marginal {:?}: error {}", worst.1, worst.0)
        })?;

        let fixtures = low_dimensional_fixtures();
        let grid = GridSpec::new(GRID_RESOLUTION, 2).unwrap();
        let mut worst_gap: f64 = 0.0;
        for (mx, my) in &fixtures {
            let spec = build_polytope(mx, my);
            let me = maxent_scm(&spec).map_err(|e| format!("{mx:?} {my:?}: {e}"))?;
            let (h, _) =
                grid_max_entropy(&spec, &grid).map_err(|e| format!("{mx:?} {my:?}: {e}"))?;
            let gap = me.entropy - h;
            worst_gap = worst_gap.max(gap.abs());
            check(gap.abs() <= GRID_ENTROPY_TOL, || {
                format!("{mx:?} {my:?}: maxent {} vs grid {h}", me.entropy)
            })?;
        }
        Ok(format!(
            "100 single marginals within {:e}; {} two-marginal fixtures within {worst_gap:e} bits",
            worst.0,
            fixtures.len()
        ))
    })();
    report(9, "maximum-entropy estimates match grid search", outcome);
}

#[test]
fn criterion_10_evidence_never_raises_entropy() {
    let outcome = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mx = marg(0.5, 0.4, 0.5);
        let p_z0 = mx.p_z0();
        let mut candidates = Vec::new();
        while candidates.len() < 100 {
            let i = candidates.len();
            let my = match i % 5 {
                0..=3 => match degenerate_partner(&mut rng, p_z0, CASES[i % 4]) {
                    Some(m) => m,
                    None => continue,
                },
                _ => {
                    // non-degenerate partner with the same outcome marginal
                    let py0 = rng.gen_range(0.05..0.95);
                    let a: f64 = rng.gen_range(0.0..1.0);
                    let b = (p_z0 - py0 * a) / (1.0 - py0);
                    if !(0.0..=1.0).contains(&b) {
                        continue;
                    }
                    marg(a, b, py0)
                }
            };
            candidates.push((format!("candidate-{i}"), my));
        }
        let ranking = rank_evidence(&mx, &candidates);
        check(ranking.failed.is_empty(), || {
            format!("failures: {:?}", ranking.failed)
        })?;
        for e in &ranking.ranked {
            check(e.entropy_after <= e.entropy_baseline + RANKING_TOL, || {
                format!("{e:?}")
            })?;
        }
        check(!ranking.ranked.is_empty(), || {
            "no compatible candidates".into()
        })?;
        Ok(format!(
            "{} compatible and {} incompatible candidates; no entropy increase",
            ranking.ranked.len(),
            ranking.incompatible.len()
        ))
    })();
    report(10, "evidence ranking never increases entropy", outcome);
}

#[test]
fn criterion_11_sweep_properties() {
    let outcome = (|| {
        let cfg = SweepConfig {
            mx: FixedMarginal {
                p00: 0.5,
                p01: 0.4,
                p_x0: 0.5,
            },
            pp00: Range {
                start: 0.0,
                stop: 0.95,
                steps: 20,
            },
            pp01: Range {
                start: 0.0,
                stop: 0.95,
                steps: 20,
            },
            p_y0: Range {
                start: 0.3,
                stop: 0.7,
                steps: 5,
            },
            outputs: [
                SweepOutput::Entropy,
                SweepOutput::LambdaRangeWidth,
                SweepOutput::MaxentLambdaNormalized,
            ]
            .into(),
        };
        let start = Instant::now();
        let rows = run_sweep(&cfg).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        check(rows.len() == 2000, || format!("{} rows", rows.len()))?;
        check(elapsed < SWEEP_TIME, || format!("took {elapsed:?}"))?;
        for r in &rows {
            if let Some(v) = r.maxent_lambda_normalized {
                check(
                    (-NORMALIZED_TOL..=1.0 + NORMALIZED_TOL).contains(&v),
                    || format!("{r:?}"),
                )?;
            }
        }
        let compatible = rows.iter().filter(|r| r.compatible).count();
        let (Some(all), Some(degenerate)) = entropy_means(&rows) else {
            return Err(format!(
                "no entropies on the degenerate slice ({compatible} compatible cells)"
            ));
        };
        check(degenerate < all, || {
            format!("degenerate-slice mean {degenerate} is not below grid mean {all}")
        })?;
        Ok(format!(
            "2000 cells ({compatible} compatible) in {elapsed:?}; degenerate-slice mean {degenerate:.4} < grid mean {all:.4} bits"
        ))
    })();
    report(
        11,
        "sweep positions stay in [0, 1] and entropy dips on degenerate slices",
        outcome,
    );
}

#[test]
fn criterion_12_abduction_matches_closed_forms() {
    let outcome = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut worst: f64 = 0.0;
        let mut undefined = 0;
        for _ in 0..10_000 {
            let m = random_marginal(&mut rng);
            let lambda = random_lambda(&mut rng, &m);
            let pairs = [
                (Query::Pns, pns_from_lambda(&m, lambda)),
                (
                    Query::SuffNonmono,
                    prob_sufficient_nonmonotonicity(&m, lambda),
                ),
                (
                    Query::NecNonmono,
                    prob_necessary_nonmonotonicity(&m, lambda),
                ),
            ];
            for (q, closed) in pairs {
                match (closed, abduction_oracle(&m, lambda, q)) {
                    (Ok(a), Ok(b)) => {
                        worst = worst.max((a - b).abs());
                        check((a - b).abs() <= EXACT_TOL, || {
                            format!("{m:?} lambda {lambda} {q:?}: closed {a} vs oracle {b}")
                        })?;
                    }
                    (
                        Err(Error::ConditioningEventNull(_)),
                        Err(Error::ConditioningEventNull(_)),
                    ) => undefined += 1,
                    (a, b) => return Err(format!("{m:?} lambda {lambda} {q:?}: {a:?} vs {b:?}")),
                }
            }
        }
        Ok(format!(
            "10000 (m, lambda) pairs, max error {worst:e}, {undefined} queries with a null conditioning event"
        ))
    })();
    report(
        12,
        "counterfactual closed forms match abduction by enumeration",
        outcome,
    );
}

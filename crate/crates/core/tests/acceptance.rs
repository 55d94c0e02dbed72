//! Release gate: every headline capability exercised end to end at its
//! advertised tolerance, one printed verdict line per criterion.
//!
//! Run with `--nocapture` to see the verdict lines on success; cargo
//! prints them automatically for failing tests.

use std::time::Instant;

use nalgebra::{Complex, DMatrix};
use rand::Rng;

use qmarg::analytic::{
    constraint_counts, depolarize_set, epsilon_star, intersection_family,
};
use qmarg::experiments::{ame_search, fraction_experiment, verify_identities, AmeOptions};
use qmarg::imposition::{
    closed_form, impose_all, impose_all_ordered, impose_one,
};
use qmarg::operator::{hermitian_eigenvalues, hs_distance_sq, DensityMatrix, HermitianOperator};
use qmarg::sampling::{marginals_of, sample_hs_state, RngStream};
use qmarg::{MarginalSet, PartySubset, SystemShape};

fn verdict(number: usize, label: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {number} [{label}]: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn random_subsets(n: usize, count: usize, rng: &mut impl Rng) -> Vec<PartySubset> {
    // Only 2^n - 1 distinct nonempty subsets exist; cap so the draw terminates.
    let count = count.min((1usize << n) - 1);
    let mut masks = std::collections::BTreeSet::new();
    while masks.len() < count {
        masks.insert(rng.gen_range(1usize..(1 << n)));
    }
    masks
        .into_iter()
        .map(|mask| {
            let indices: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            PartySubset::new(indices).unwrap()
        })
        .collect()
}

/// A family of independently drawn marginals on random subsets; almost
/// surely mutually inconsistent wherever subsets overlap.
fn independent_family(
    shape: &SystemShape,
    subsets: Vec<PartySubset>,
    stream: &RngStream,
) -> MarginalSet<f64> {
    let entries = subsets
        .into_iter()
        .enumerate()
        .map(|(i, subset)| {
            let sub = shape.sub_shape(&subset).unwrap();
            let state = sample_hs_state::<f64>(&sub, &stream.substream(100 + i as u64));
            (subset, state)
        })
        .collect();
    MarginalSet::new(shape.clone(), entries).unwrap()
}

fn hs_norm(op: &HermitianOperator<f64>) -> f64 {
    let zero = HermitianOperator::zero(op.shape().clone());
    hs_distance_sq(op, &zero).unwrap().sqrt()
}

fn pure_pair(index: usize) -> DensityMatrix<f64> {
    let mut m = DMatrix::<Complex<f64>>::zeros(4, 4);
    m[(index, index)] = Complex::new(1.0, 0.0);
    DensityMatrix::new(HermitianOperator::new(SystemShape::qubits(2).unwrap(), m).unwrap())
        .unwrap()
}

#[test]
fn acceptance_1_dual_route_equivalence() {
    let started = Instant::now();
    let base = RngStream::new(101);
    let mut worst = 0.0f64;
    for i in 0..200u64 {
        let n = 3 + (i % 2) as usize;
        let m = 1 + (i % 6) as usize;
        let shape = SystemShape::qubits(n).unwrap();
        let stream = base.substream(i);
        let mut rng = stream.rng();
        let subsets = random_subsets(n, m, &mut rng);
        // Even iterations: marginals of one state (self-consistent).
        // Odd iterations: independent draws (inconsistent).
        let marginals = if i % 2 == 0 {
            let tau = sample_hs_state::<f64>(&shape, &stream.substream(1));
            marginals_of(&tau, &subsets).unwrap()
        } else {
            independent_family(&shape, subsets, &stream)
        };
        let rho = sample_hs_state::<f64>(&shape, &stream.substream(2));
        let sequential = impose_all(rho.as_operator(), &marginals).unwrap();
        let explicit = closed_form(rho.as_operator(), &marginals).unwrap();
        worst = worst.max(hs_distance_sq(&sequential, &explicit).unwrap().sqrt());
    }
    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst < 1e-10 && elapsed < 10.0;
    verdict(
        1,
        "closed form matches sequential imposition",
        pass,
        &format!("200 instances, worst gap {worst:.2e}, {elapsed:.2}s"),
    );
    assert!(pass, "worst {worst:.3e} elapsed {elapsed:.2}s");
}

#[test]
fn acceptance_2_operator_identities() {
    let started = Instant::now();
    let base = RngStream::new(202);
    let mut worst = 0.0f64;
    for i in 0..25u64 {
        let n = 3 + (i % 3) as usize;
        let shape = SystemShape::qubits(n).unwrap();
        let stream = base.substream(i);
        let mut rng = stream.rng();
        let subsets = random_subsets(n, 1 + (i % 4) as usize, &mut rng);
        let tau = sample_hs_state::<f64>(&shape, &stream.substream(1));
        let consistent = marginals_of(&tau, &subsets).unwrap();
        let rho = sample_hs_state::<f64>(&shape, &stream.substream(2));

        let out = impose_all(rho.as_operator(), &consistent).unwrap();
        // Trace preservation.
        worst = worst.max((out.trace() - 1.0).abs());
        // Every imposed marginal is carried.
        for entry in consistent.iter() {
            let reduced = out.partial_trace(&entry.subset).unwrap();
            let gap = hs_distance_sq(&reduced, entry.state.as_operator()).unwrap();
            worst = worst.max(gap.sqrt());
        }
        // Idempotence.
        let twice = impose_all(&out, &consistent).unwrap();
        worst = worst.max(hs_distance_sq(&out, &twice).unwrap().sqrt());
        // Order independence for self-consistent families.
        let m = consistent.len();
        let order: Vec<usize> = (0..m).rev().collect();
        let reversed = impose_all_ordered(rho.as_operator(), &consistent, &order).unwrap();
        worst = worst.max(hs_distance_sq(&out, &reversed).unwrap().sqrt());
    }

    // The commutator of two overlapping impositions depends only on the
    // overlap mismatch of the imposed marginals, never on the input.
    let shape = SystemShape::qubits(3).unwrap();
    let a = PartySubset::new(vec![0, 1]).unwrap();
    let b = PartySubset::new(vec![1, 2]).unwrap();
    let stream = RngStream::new(404);
    let sigma_a = sample_hs_state::<f64>(&shape.sub_shape(&a).unwrap(), &stream.substream(1));
    let sigma_b = sample_hs_state::<f64>(&shape.sub_shape(&b).unwrap(), &stream.substream(2));
    let commutator = |input: &DensityMatrix<f64>,
                      sa: &DensityMatrix<f64>,
                      sb: &DensityMatrix<f64>| {
        let ab = impose_one(&impose_one(input.as_operator(), &a, sa).unwrap(), &b, sb).unwrap();
        let ba = impose_one(&impose_one(input.as_operator(), &b, sb).unwrap(), &a, sa).unwrap();
        ab.sub(&ba).unwrap()
    };
    let rho = sample_hs_state::<f64>(&shape, &stream.substream(3));
    let tau = sample_hs_state::<f64>(&shape, &stream.substream(4));
    let c_rho = commutator(&rho, &sigma_a, &sigma_b);
    let c_tau = commutator(&tau, &sigma_a, &sigma_b);
    worst = worst.max(hs_distance_sq(&c_rho, &c_tau).unwrap().sqrt());
    let overlap = a.intersection(&b);
    let sa = sigma_a
        .as_operator()
        .partial_trace(&overlap.positions_in(&a).unwrap())
        .unwrap();
    let sb = sigma_b
        .as_operator()
        .partial_trace(&overlap.positions_in(&b).unwrap())
        .unwrap();
    let mismatch = hs_distance_sq(&sa, &sb).unwrap();
    worst = worst.max((hs_norm(&c_rho) - (mismatch / 4.0).sqrt()).abs());

    // A deliberately clashing pair: |00><00| against |11><11| overlaps in
    // orthogonal single-qubit states, so the commutator is large.
    let clash = commutator(&rho, &pure_pair(0), &pure_pair(3));
    let clash_norm = hs_norm(&clash);

    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst < 1e-10 && clash_norm > 0.1 && elapsed < 30.0;
    verdict(
        2,
        "imposition operator identities",
        pass,
        &format!(
            "worst identity gap {worst:.2e}, clash commutator norm {clash_norm:.3}, {elapsed:.2}s"
        ),
    );
    assert!(pass, "worst {worst:.3e} clash {clash_norm:.3} elapsed {elapsed:.2}s");
}

#[test]
fn acceptance_3_depolarization_threshold() {
    let started = Instant::now();
    let base = RngStream::new(303);
    let mut worst_lambda = f64::INFINITY;
    let mut bound_ok = true;
    for i in 0..100u64 {
        let n = 2 + (i % 4) as usize;
        let shape = SystemShape::qubits(n).unwrap();
        let stream = base.substream(i);
        let mut rng = stream.rng();
        let subsets = random_subsets(n, 1 + (i % 5) as usize, &mut rng);
        let tau = sample_hs_state::<f64>(&shape, &stream.substream(1));
        let marginals = marginals_of(&tau, &subsets).unwrap();

        let eps = epsilon_star(&marginals);
        let soft = depolarize_set(&marginals, eps).unwrap();
        let mm = DensityMatrix::maximally_mixed(shape.clone());
        let imposed = impose_all(mm.as_operator(), &soft).unwrap();
        let values = hermitian_eigenvalues(&imposed).unwrap();
        let lambda_min = values[values.len() - 1];
        worst_lambda = worst_lambda.min(lambda_min);

        let d = shape.total_dim() as f64;
        let family: Vec<PartySubset> = soft.subsets().cloned().collect();
        let bound = (1.0 - intersection_family(&family).len() as f64 * (1.0 - eps) * (d - 1.0)) / d;
        bound_ok &= lambda_min >= bound - 1e-10;
    }
    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst_lambda >= -1e-10 && bound_ok && elapsed < 30.0;
    verdict(
        3,
        "depolarization threshold guarantees positivity",
        pass,
        &format!("100 families, worst lambda_min {worst_lambda:.2e}, bound held {bound_ok}, {elapsed:.2}s"),
    );
    assert!(pass, "worst {worst_lambda:.3e} bound_ok {bound_ok} elapsed {elapsed:.2}s");
}

#[test]
fn acceptance_4_uniform_family_formulas() {
    let started = Instant::now();
    let report = verify_identities::<f64>(6, &RngStream::new(505)).unwrap();
    // k=1 for n=2..6, k=2 for n=3..6, plus the (5,3) expression.
    let complete = report.checks.len() == 10;
    let mut xi_ok = true;
    for check in &report.checks {
        if check.k == 2 {
            let nf = check.n as f64;
            xi_ok &= check.xi == Some(1.0 + nf * nf / 2.0 - 3.0 * nf / 2.0);
        }
    }

    // Extract the identity coefficient numerically on four qubits: after
    // removing the pair and single-site terms from the imposition of all
    // two-body marginals on I/d, only xi/d times the identity remains.
    let shape = SystemShape::qubits(4).unwrap();
    let tau = sample_hs_state::<f64>(&shape, &RngStream::new(606));
    let pairs = marginals_of(&tau, &PartySubset::enumerate(4, 2)).unwrap();
    let mm = DensityMatrix::maximally_mixed(shape.clone());
    let mut remainder = impose_all(mm.as_operator(), &pairs).unwrap();
    for entry in pairs.iter() {
        let embedded = entry.state.embed(&shape, &entry.subset).unwrap();
        remainder = remainder.sub(&embedded).unwrap();
    }
    for site in 0..4 {
        let single = PartySubset::new(vec![site]).unwrap();
        let sigma_i = tau.partial_trace_state(&single).unwrap();
        let embedded = sigma_i.embed(&shape, &single).unwrap();
        remainder = remainder.add(&embedded.scale(2.0)).unwrap();
    }
    let xi_numeric = remainder.matrix()[(0, 0)].re * 16.0;
    let identity_gap = hs_distance_sq(
        &remainder,
        &HermitianOperator::identity(shape).scale(3.0 / 16.0),
    )
    .unwrap()
    .sqrt();

    let elapsed = started.elapsed().as_secs_f64();
    let pass = complete
        && report.max_deviation < 1e-10
        && xi_ok
        && (xi_numeric - 3.0).abs() < 1e-10
        && identity_gap < 1e-10
        && elapsed < 30.0;
    verdict(
        4,
        "explicit uniform-family formulas",
        pass,
        &format!(
            "10 cases, max deviation {:.2e}, xi(4) numerically {xi_numeric:.12}, {elapsed:.2}s",
            report.max_deviation
        ),
    );
    assert!(
        pass,
        "complete {complete} max {:.3e} xi_ok {xi_ok} xi_num {xi_numeric} gap {identity_gap:.3e}",
        report.max_deviation
    );
}

#[test]
fn acceptance_5_positivity_fractions() {
    let started = Instant::now();
    struct Cell {
        n: usize,
        k: usize,
        lo: f64,
        hi: f64,
    }
    let cells = [
        Cell { n: 3, k: 2, lo: 0.617, hi: 0.717 },
        Cell { n: 4, k: 2, lo: 0.99, hi: 1.0 },
        Cell { n: 4, k: 3, lo: 0.0, hi: 0.01 },
        Cell { n: 5, k: 3, lo: 0.429, hi: 0.529 },
        Cell { n: 6, k: 3, lo: 0.99, hi: 1.0 },
        Cell { n: 8, k: 5, lo: 0.014, hi: 0.074 },
    ];
    let mut pass = true;
    let mut detail = String::new();
    for (index, cell) in cells.iter().enumerate() {
        let stream = RngStream::with_stream(42, (index as u64) << 32);
        let psd_tol = 1e-10 * (1u64 << cell.n) as f64;
        let result = fraction_experiment::<f64>(cell.n, cell.k, 1000, &stream, psd_tol).unwrap();
        let ok = result.fraction >= cell.lo && result.fraction <= cell.hi;
        pass &= ok;
        detail.push_str(&format!(
            "({},{})={:.3}{} ",
            cell.n,
            cell.k,
            result.fraction,
            if ok { "" } else { "!" },
        ));
    }
    let elapsed = started.elapsed().as_secs_f64();
    pass &= elapsed < 900.0;
    verdict(
        5,
        "positivity fractions at 1000 samples",
        pass,
        &format!("{detail}{elapsed:.1}s"),
    );
    assert!(pass, "{detail} elapsed {elapsed:.1}s");
}

#[test]
fn acceptance_6_entangled_state_recovery() {
    let started = Instant::now();
    let cases = [(5usize, 2usize, 2usize), (6, 2, 3), (4, 3, 2)];
    let mut pass = true;
    let mut detail = String::new();
    for (index, &(n, local_dim, k)) in cases.iter().enumerate() {
        let options = AmeOptions {
            eps: 1e-7,
            max_iters: 10_000,
            stall_window: 500,
            attempts: 10,
            rng: RngStream::new(5 + index as u64),
        };
        let result = ame_search::<f64>(n, local_dim, k, &options).unwrap();
        let last = result.report.trace.last().unwrap();
        let mut marginal_ok = true;
        for subset in PartySubset::enumerate(n, k) {
            let reduced = result.report.final_state.partial_trace_state(&subset).unwrap();
            let target = DensityMatrix::maximally_mixed(reduced.shape().clone());
            let gap = hs_distance_sq(reduced.as_operator(), target.as_operator()).unwrap();
            marginal_ok &= gap < 1e-6;
        }
        let ok = result.report.converged
            && last.d_total < 1e-7
            && result.report.iterations <= 10_000
            && result.purity > 1.0 - 1e-6
            && marginal_ok;
        pass &= ok;
        detail.push_str(&format!(
            "({n},{local_dim}) {} in {} iters (attempt {}){} ",
            if result.report.converged { "converged" } else { "failed" },
            result.report.iterations,
            result.attempts_used,
            if ok { "" } else { "!" },
        ));
    }

    // Four qubits with maximally mixed halves: the target does not exist,
    // so a full budget with stall detection disabled must end unconverged
    // and far from zero.
    let options = AmeOptions {
        eps: 1e-7,
        max_iters: 10_000,
        stall_window: 10_000,
        attempts: 1,
        rng: RngStream::new(9),
    };
    let absent = ame_search::<f64>(4, 2, 2, &options).unwrap();
    let last_d = absent.report.trace.last().unwrap().d_total;
    let absent_ok = !absent.report.converged && last_d > 1e-2;
    pass &= absent_ok;
    detail.push_str(&format!("(4,2) unconverged D_T={last_d:.3}"));

    let elapsed = started.elapsed().as_secs_f64();
    verdict(
        6,
        "maximally entangled state recovery",
        pass,
        &format!("{detail}, {elapsed:.1}s"),
    );
    assert!(pass, "{detail} elapsed {elapsed:.1}s");
}

#[test]
fn acceptance_7_constraint_counts() {
    let counts = constraint_counts(10, 8, 2).unwrap();
    let pass = counts.standard == 2_949_120
        && counts.compressed == 1_048_576
        && counts.advantage > (1 << 14);
    verdict(
        7,
        "constraint counting",
        pass,
        &format!(
            "standard {}, compressed {}, advantage {}",
            counts.standard, counts.compressed, counts.advantage
        ),
    );
    assert!(pass);
}

#[test]
fn acceptance_8_documented_exclusions() {
    // Nothing asserted: these are the documented limits of the desk-scale
    // reproduction, recorded so the gate output lists them explicitly.
    verdict(
        8,
        "documented exclusions",
        true,
        "positivity-fraction columns for n >= 11 at full sample counts are out of scope \
         (gate them behind --allow-large in the CLI); the existence question for a 6-party \
         4-level maximally entangled state is not attempted",
    );
}

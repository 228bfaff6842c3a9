//! Acceptance suite: every criterion runs at its stated tolerance and prints
//! one PASS/FAIL line (visible under `--nocapture`).
//!
//! 1.  Information-engine identities on 1000 seeded tables, residual <= 1e-9.
//! 2.  Bernoulli divergence boundary: D(B_{1.01p}||B_p), D(B_{0.99p}||B_p)
//!     >= 5e-5*p with one-sided monotonicity on a 100-point grid.
//! 3.  Semi-adaptive discipline + exhaustive answer equivalence for every
//!     n <= 6, k <= 4 (all 2^(n(k+1)) inputs) plus 1e4 seeded instances at
//!     n = 2^12.
//! 4.  sqrt(n) probe profile at n in {2^10, 2^12, 2^14} under the hard
//!     distribution; fallback frequency < 1e-6 over 1e5 queries.
//! 5.  Dynamic reduction bounds: |Pi_i| <= 4*t_q*w, |U| <= t_u*n*w on every
//!     run; answer equality exhaustive at n <= 4, k <= 3; visibility audit
//!     clean over 1e3 trials per constraint.
//! 6.  Exact information-cost bounds at n=2, k=3, p=2 for >= 3 registered
//!     protocols including an adversarial U = T; Megan/T independence <= 1e-9.
//! 7.  Embedding consistency: exact vs Monte Carlo (1e6 samples) profiles
//!     within 4 standard errors on 5 toy protocols; err_and1 = 0 exactly for
//!     zero-error sources.
//! 8.  Cut-and-paste bounded falsification at gamma in {1e-2, 1e-3},
//!     z_size <= 16, eps = 1e-2, 200 restarts; simplex sweep at resolution
//!     1e3 with zero violations.
//! 9.  Circuit translation: 1000 seeded circuits (d <= 3, wires <= 1e4, r
//!     swept over powers of two), measured probes <= (l/r)^d, |G| < r,
//!     exhaustive equivalence for n <= 12, non-adaptivity audit.
//! 10. Modified-4-party simulation of 1.5-round protocols: identical answers
//!     and |Pi^M| <= 2C on all enumerated toy inputs.

use multiphase_core::andlab::{
    adversarial_search, and_costs, check_and_contract, embed_and_exact, embed_and_monte_carlo,
    largediv_sweep, CostProfile, SearchParams,
};
use multiphase_core::bits::{isqrt, BitString, BitVec};
use multiphase_core::cellprobe::{
    enforce_semi_adaptive, shipped_schemes, DataStructure, ProbeLog, Simulator, StoreT,
};
use multiphase_core::circuits::{
    audit_non_adaptive, probe_plan, random_circuit, run_static, translate, RandomCircuitParams,
    StaticDataStructure,
};
use multiphase_core::info::{kl_bernoulli, FactVerdict, JointTable};
use multiphase_core::instance::MultiphaseInstance;
use multiphase_core::nof::{
    ds_to_4party, run_one_point_five, run_protocol, verify_goodq_bounds, visibility_audit,
    AdversarialFullT, AliceSendsSi, AlwaysDisjoint, EnumerationConfig, MeganSendsSi,
    ModifiedFromOnePointFive, OnePointFive, ProtocolFamily, Stateless, UForwardsFirstBit,
};
use multiphase_core::rng::CounterRng;
use std::time::Instant;

fn finish(idx: u32, name: &str, pass: bool, details: String) {
    println!(
        "ACCEPTANCE {idx:>2} {name}: {} — {details}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {idx} ({name}) failed: {details}");
}

#[test]
fn acceptance_01_information_identities() {
    let start = Instant::now();
    let mut violations = 0u64;
    let mut checked = 0u64;
    for seed in 0..1000u64 {
        let table = JointTable::random_for_seed(seed);
        let report = table.verify_facts();
        for status in [
            &report.conditioning,
            &report.kl_mi,
            &report.chain_rule,
            &report.grow_under_indep,
            &report.shrink_under_indep,
        ] {
            checked += status.checked as u64;
            if status.verdict() == FactVerdict::Violated {
                violations += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = violations == 0 && elapsed < 10.0;
    finish(
        1,
        "information-identities",
        pass,
        format!("1000 tables, {checked} identity instances, {violations} violations, {elapsed:.2}s"),
    );
}

#[test]
fn acceptance_02_divergence_boundary() {
    let start = Instant::now();
    let mut ok = true;
    let mut worst_margin = f64::INFINITY;
    for p in [1e-2f64, 1e-3, 1e-4] {
        for q in [1.01 * p, 0.99 * p] {
            let v = kl_bernoulli(q, p);
            worst_margin = worst_margin.min(v / (5e-5 * p));
            ok &= v >= 5e-5 * p;
        }
        let mut prev = 0.0;
        for g in 1..=100 {
            let v = kl_bernoulli(p + (0.5 - p) * g as f64 / 100.0, p);
            ok &= v >= prev;
            prev = v;
        }
        let mut prev = 0.0;
        for g in 1..=100 {
            let v = kl_bernoulli(p - p * g as f64 / 100.0, p);
            ok &= v >= prev;
            prev = v;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = ok && elapsed < 1.0;
    finish(
        2,
        "divergence-boundary",
        pass,
        format!("worst margin {worst_margin:.3}x over the 5e-5*p floor, {elapsed:.3}s"),
    );
}

#[test]
fn acceptance_03_semi_adaptive_exhaustive() {
    let start = Instant::now();
    let threads = std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1);
    let mut checked = 0u64;
    for n in 1..=6usize {
        for k in 1..=4usize {
            let space = 1u64 << (n * k);
            let chunk = space.div_ceil(threads as u64).max(1);
            let results = std::thread::scope(|scope| {
                let mut handles = Vec::new();
                let mut lo = 0u64;
                while lo < space {
                    let hi = (lo + chunk).min(space);
                    handles.push(scope.spawn(move || {
                        multiphase_core::cellprobe::exhaustive_soundness_check(n, k, lo, hi)
                    }));
                    lo = hi;
                }
                handles.into_iter().map(|h| h.join().expect("no panics")).collect::<Vec<_>>()
            });
            for r in results {
                match r {
                    Ok(c) => checked += c,
                    Err(e) => finish(3, "semi-adaptive-exhaustive", false, e),
                }
            }
        }
    }

    // plus 1e4 seeded random instances at n = 2^12
    let n = 1 << 12;
    let k = 16;
    let schemes = shipped_schemes(n, k);
    let mut sims: Vec<Simulator> = schemes.iter().map(|ds| Simulator::new(ds.as_ref())).collect();
    let mut log = ProbeLog::new();
    let mut random_checked = 0u64;
    for seed in 0..10_000u64 {
        let inst = if seed % 2 == 0 {
            MultiphaseInstance::sample_hard(n, k, seed).unwrap()
        } else {
            MultiphaseInstance::sample_with_gamma(n, k, 0.01, seed).unwrap()
        };
        for (ds, sim) in schemes.iter().zip(&mut sims) {
            sim.load(ds.as_ref(), &inst).unwrap();
            let budget = ds.budgets();
            let i = (seed % k as u64) as usize;
            log.clear();
            sim.query(ds.as_ref(), &inst, i, &mut log)
                .unwrap_or_else(|e| panic!("{} seed {seed}: {e}", ds.name()));
            let verdict = enforce_semi_adaptive(&log, &budget);
            assert!(verdict.pass, "{} seed {seed}: {:?}", ds.name(), verdict.violation);
            random_checked += 1;
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    let pass = elapsed < 300.0;
    finish(
        3,
        "semi-adaptive-exhaustive",
        pass,
        format!("{checked} exhaustive query checks + {random_checked} random-instance checks, {elapsed:.1}s (< 300s)"),
    );
}

#[test]
fn acceptance_04_sqrt_probe_profile() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    let mut total_queries = 0u64;
    let mut total_fallbacks = 0u64;
    for exp in [10u32, 12, 14] {
        let n = 1usize << exp;
        let k = 64usize;
        let ds = multiphase_core::cellprobe::SqrtScheme::new(
            n,
            k,
            multiphase_core::cellprobe::ExplicitTAdvice::direct(),
        );
        let w = ds.word_size();
        let mut sim = Simulator::new(&ds);
        let mut log = ProbeLog::new();
        let mut tqs: Vec<u64> = Vec::new();
        let mut fallbacks = 0u64;
        let cap = isqrt(n);
        let instances = 100_000u64.div_ceil(k as u64);
        for idx in 0..instances {
            let inst = MultiphaseInstance::sample_hard(n, k, 0xACC4 + idx).unwrap();
            sim.load(&ds, &inst).unwrap();
            let fallback_instance = inst.t().count_ones() > cap;
            for i in 0..k {
                log.clear();
                sim.query(&ds, &inst, i, &mut log).unwrap();
                tqs.push(log.t1() + log.t2());
                if fallback_instance {
                    fallbacks += 1;
                }
            }
        }
        total_queries += tqs.len() as u64;
        total_fallbacks += fallbacks;
        tqs.sort_unstable();
        let p99 = tqs[(tqs.len() * 99).div_ceil(100) - 1];
        let bound = 3.0 * (n as f64).sqrt() * (n as f64).log2() / w as f64;
        if (p99 as f64) > bound {
            pass = false;
        }
        lines.push(format!("n=2^{exp}: p99 t_q = {p99} <= {bound:.1}"));
    }
    // fewer than 1 in 1e6 queries may fall back; with 1e5+ queries that
    // means zero observed fallbacks
    if total_fallbacks > 0 {
        pass = false;
    }
    let elapsed = start.elapsed().as_secs_f64();
    finish(
        4,
        "sqrt-probe-profile",
        pass,
        format!(
            "{}; fallbacks {total_fallbacks}/{total_queries}, {elapsed:.1}s",
            lines.join("; ")
        ),
    );
}

#[test]
fn acceptance_05_reduction_bounds() {
    let start = Instant::now();
    let mut runs = 0u64;
    // exhaustive protocol/DS answer equality and per-run bit bounds
    for n in 1..=4usize {
        for k in 1..=3usize {
            let families = [
                ds_to_4party(multiphase_core::cellprobe::PrecomputeAnswers::new(n, k)),
            ];
            let store = ds_to_4party(StoreT::new(n, k));
            let sqrt = ds_to_4party(multiphase_core::cellprobe::SqrtScheme::new(
                n,
                k,
                multiphase_core::cellprobe::ExplicitTAdvice::direct(),
            ));
            let mut inst = MultiphaseInstance::from_masks(n, &vec![0u64; k], 0, 0.5);
            let mut set_masks = vec![0u64; k];
            for s_combined in 0..1u64 << (n * k) {
                for (f, m) in set_masks.iter_mut().enumerate() {
                    *m = s_combined >> (f * n) & ((1u64 << n) - 1);
                }
                for t_mask in 0..1u64 << n {
                    inst.overwrite_masks(&set_masks, t_mask);
                    for i in 0..k {
                        for run in [
                            families[0].run(&inst, i).unwrap(),
                            store.run(&inst, i).unwrap(),
                            sqrt.run(&inst, i).unwrap(),
                        ] {
                            assert_eq!(run.transcript.answer, inst.answer(i));
                            assert!(
                                run.within_bounds,
                                "bounds failed at n={n} k={k} s={s_combined:#x} t={t_mask:#x} i={i}: {run:?}"
                            );
                            runs += 1;
                        }
                    }
                }
            }
        }
    }
    // visibility audit: zero violations over 1e3 counterfactual trials per
    // constraint, for each shipped scheme
    let n = 8;
    let k = 3;
    let inst = MultiphaseInstance::sample_with_gamma(n, k, 0.3, 0xA0D17).unwrap();
    let mut audit_trials = 0u64;
    let pre = ds_to_4party(multiphase_core::cellprobe::PrecomputeAnswers::new(n, k));
    let st = ds_to_4party(StoreT::new(n, k));
    let sq = ds_to_4party(multiphase_core::cellprobe::SqrtScheme::new(
        n,
        k,
        multiphase_core::cellprobe::ExplicitTAdvice::direct(),
    ));
    for family in [&pre as &dyn ProtocolFamily, &st, &sq] {
        let report = visibility_audit(family, &inst, 1, 1000, 0xBEE).unwrap();
        assert!(report.clean(), "{}: {:?}", family.name(), report.first_failure());
        audit_trials += report.constraints.iter().map(|c| c.trials as u64).sum::<u64>();
    }
    let elapsed = start.elapsed().as_secs_f64();
    finish(
        5,
        "reduction-bounds",
        true,
        format!("{runs} exhaustive reduction runs within bounds; {audit_trials} audit trials clean; {elapsed:.1}s"),
    );
}

#[test]
fn acceptance_06_information_cost_bounds() {
    let start = Instant::now();
    let cfg = EnumerationConfig::hard(2, 3, 2);
    let store = ds_to_4party(StoreT::new(2, 3));
    let families: [&dyn ProtocolFamily; 4] = [
        &Stateless(MeganSendsSi),
        &Stateless(AliceSendsSi),
        &Stateless(AdversarialFullT),
        &store,
    ];
    let mut details = Vec::new();
    let mut pass = true;
    for family in families {
        let report = verify_goodq_bounds(family, &cfg, 100).unwrap();
        pass &= report.pass && report.t_independence.abs() <= 1e-9;
        details.push(format!(
            "{}: path {:.3e}<={:.3e}, I(Z;T) {:.3e}<={}, I(ZT;S) {:.3e}, corr {:.3e}<={:.3e}, I(T;S_P,PiM_P) {:.1e}",
            report.protocol,
            report.path_info,
            report.path_bound,
            report.z_t_info,
            report.c_bits,
            report.zt_s_info,
            report.correlation,
            report.correlation_bound,
            report.t_independence
        ));
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 120.0;
    finish(6, "information-cost-bounds", pass, format!("{}; {elapsed:.1}s", details.join(" | ")));
}

#[test]
fn acceptance_07_embedding_consistency() {
    let start = Instant::now();
    let cfg = EnumerationConfig::with_gamma(2, 2, 1, 0.25);
    let store = ds_to_4party(StoreT::new(2, 2));
    let families: [&dyn ProtocolFamily; 5] = [
        &Stateless(MeganSendsSi),
        &Stateless(AliceSendsSi),
        &Stateless(AdversarialFullT),
        &Stateless(UForwardsFirstBit),
        &store,
    ];
    let mut pass = true;
    let mut worst_ratio = 0.0f64;
    for family in families {
        let exact = embed_and_exact(family, &cfg).unwrap();
        assert!(exact.zero_error, "{} must be zero-error", family.name());
        let exact_profile = and_costs(&exact.process).unwrap();
        assert_eq!(exact_profile.err_and1, 0.0, "{}", family.name());
        // N = 1e6 Monte Carlo samples split over the four input pairs
        let mc = embed_and_monte_carlo(family, &cfg, 250_000, 50, 0xC0DE).unwrap();
        assert_eq!(mc.mean.err_and1, 0.0, "{}", family.name());
        for f in 0..6 {
            let diff = (exact_profile.field(f) - mc.mean.field(f)).abs();
            let tol = 4.0 * mc.se[f] + 1e-9;
            worst_ratio = worst_ratio.max(diff / tol);
            if diff > tol {
                pass = false;
                println!(
                    "  mismatch {} field {}: exact {} mc {} se {}",
                    family.name(),
                    CostProfile::FIELDS[f],
                    exact_profile.field(f),
                    mc.mean.field(f),
                    mc.se[f]
                );
            }
        }
    }
    // negative control: the always-1 protocol is not zero-error and its
    // process must fail the correctness contract
    let bad = embed_and_exact(&Stateless(AlwaysDisjoint), &cfg).unwrap();
    assert!(!bad.zero_error);
    assert!(!check_and_contract(&bad.process).err_and1_zero);
    let elapsed = start.elapsed().as_secs_f64();
    finish(
        7,
        "embedding-consistency",
        pass,
        format!(
            "5 protocols, worst |exact - mc| at {:.2}x of the 4-standard-error tolerance, {elapsed:.1}s",
            worst_ratio
        ),
    );
}

#[test]
fn acceptance_08_cut_and_paste_falsification() {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    for gamma in [1e-2f64, 1e-3] {
        for z_size in [2usize, 4, 8, 16] {
            let params = SearchParams::new(gamma, z_size, 1e-2, 200, 0x5EE4).unwrap();
            let out = adversarial_search(&params).unwrap();
            match &out.best {
                Some((_, profile)) => {
                    if profile.i_zy < 1e-3 * gamma {
                        pass = false;
                        details.push(format!(
                            "VIOLATION gamma={gamma} z={z_size}: feasible I(Z;Y) = {}",
                            profile.i_zy
                        ));
                    } else {
                        details.push(format!(
                            "gamma={gamma} z={z_size}: min feasible I(Z;Y) = {:.3e} ({:.2}*gamma)",
                            profile.i_zy,
                            profile.i_zy / gamma
                        ));
                    }
                }
                None => details.push(format!("gamma={gamma} z={z_size}: infeasible within budget")),
            }
        }
        let sweep = largediv_sweep(gamma, 1000).unwrap();
        if sweep.violations != 0 || sweep.filtered == 0 {
            pass = false;
        }
        details.push(format!(
            "sweep gamma={gamma}: {} filtered, {} violations, kappa {:.3}",
            sweep.filtered, sweep.violations, sweep.kappa_max
        ));
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 1800.0;
    finish(
        8,
        "cut-and-paste-falsification",
        pass,
        format!("{}; {elapsed:.1}s (< 1800s)", details.join("; ")),
    );
}

#[test]
fn acceptance_09_circuit_translation() {
    let start = Instant::now();
    let mut bound_checks = 0u64;
    let mut equivalence_inputs = 0u64;
    let mut audits = 0u64;
    for idx in 0..1000u64 {
        let mut rng = CounterRng::new(0x91C0 + idx);
        let params = match idx % 10 {
            0 => RandomCircuitParams {
                n_inputs: 32,
                n_outputs: 6,
                depth: 1 + (idx % 3) as u32,
                wire_budget: 2_000 + (idx * 7919) % 8_000,
                max_fanin: 16,
            },
            1..=3 => RandomCircuitParams {
                n_inputs: 4 + (idx % 9) as usize, // 4..=12: exhaustive range
                n_outputs: 4,
                depth: 1 + (idx % 3) as u32,
                wire_budget: 40 + idx % 160,
                max_fanin: 8,
            },
            _ => RandomCircuitParams {
                n_inputs: 13 + (idx % 16) as usize,
                n_outputs: 4,
                depth: 1 + (idx % 3) as u32,
                wire_budget: 100 + idx % 500,
                max_fanin: 10,
            },
        };
        let circuit = random_circuit(&params, &mut rng);
        assert!(circuit.depth() <= 3 && circuit.wires() <= 10_000);
        // sweep r over powers of two within the theorem's regime r <= wires
        let wires = circuit.wires();
        let mut r = ((wires / 64).max(1)).next_power_of_two();
        let mut audited = false;
        while r <= wires.max(1) {
            let sds = translate(circuit.clone(), r);
            assert!((sds.stored_gates() as u64) < r, "|G| must stay below r");
            let bound = sds.probe_bound();
            let mut max_probes = 0usize;
            for i in 0..sds.n_queries() {
                max_probes = max_probes.max(probe_plan(&sds, i).unwrap().len());
            }
            assert!(
                max_probes as f64 <= bound + 1e-9,
                "circuit {idx}: probes {max_probes} > bound {bound} at r={r}"
            );
            bound_checks += 1;
            if !audited {
                audit_non_adaptive(&sds, 4, idx).expect("translated structures are non-adaptive");
                audits += 1;
                audited = true;
            }
            // exhaustive equivalence whenever the input space allows it
            if circuit.n_inputs() <= 12 {
                for mask in 0..1u64 << circuit.n_inputs() {
                    let x = BitVec::from_mask(circuit.n_inputs(), mask);
                    let image = sds.preprocess(&x).unwrap();
                    let want = circuit.eval(&x).unwrap();
                    for i in 0..sds.n_queries() {
                        let mut log = ProbeLog::new();
                        let got = run_static(&sds, &image, i, &mut log).unwrap();
                        assert_eq!(got, want.get(i), "circuit {idx} r={r} x={mask:#x} i={i}");
                    }
                    equivalence_inputs += 1;
                }
            }
            r *= 2;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    finish(
        9,
        "circuit-translation",
        true,
        format!(
            "1000 circuits, {bound_checks} (circuit, r) bound checks, {equivalence_inputs} exhaustive input checks, {audits} audits, {elapsed:.1}s"
        ),
    );
}

#[derive(Clone)]
struct ForwardNothing;

impl OnePointFive for ForwardNothing {
    fn name(&self) -> &'static str {
        "forward-nothing"
    }

    fn charlie(&self, _sets: &[BitVec], t: &BitVec) -> BitString {
        let mut u = BitString::new();
        u.push_bitvec(t);
        u
    }

    fn forward(&self, _u: &BitString) -> BitString {
        BitString::new()
    }

    fn alice_msg(&self, _u_prime: &BitString, sets: &[BitVec], i: usize) -> BitString {
        let mut m = BitString::new();
        m.push_bitvec(&sets[i]);
        m
    }

    fn bob_answer(&self, _u: &BitString, t: &BitVec, _i: usize, alice: &BitString) -> bool {
        !(0..t.len()).any(|j| alice.get(j) && t.get(j))
    }
}

#[derive(Clone)]
struct ForwardPrefix;

impl OnePointFive for ForwardPrefix {
    fn name(&self) -> &'static str {
        "forward-prefix"
    }

    fn charlie(&self, _sets: &[BitVec], t: &BitVec) -> BitString {
        let mut u = BitString::new();
        u.push_bitvec(t);
        u
    }

    fn forward(&self, u: &BitString) -> BitString {
        let mut out = BitString::new();
        for pos in 0..u.len() / 2 {
            out.push(u.get(pos));
        }
        out
    }

    fn alice_msg(&self, u_prime: &BitString, sets: &[BitVec], i: usize) -> BitString {
        let s_i = &sets[i];
        let mut out = BitString::new();
        let hit = (0..u_prime.len()).any(|j| u_prime.get(j) && s_i.get(j));
        out.push(hit);
        if !hit {
            for j in u_prime.len()..s_i.len() {
                out.push(s_i.get(j));
            }
        }
        out
    }

    fn bob_answer(&self, _u: &BitString, t: &BitVec, _i: usize, alice: &BitString) -> bool {
        if alice.get(0) {
            return false;
        }
        let split = t.len() / 2;
        !(split..t.len()).enumerate().any(|(off, j)| alice.get(1 + off) && t.get(j))
    }
}

#[test]
fn acceptance_10_one_point_five_simulation() {
    let start = Instant::now();
    let mut runs = 0u64;
    fn exhaust<P: OnePointFive + Clone + 'static>(proto: P, n: usize, k: usize, runs: &mut u64) {
        let wrapped = ModifiedFromOnePointFive { inner: proto.clone() };
        let mut inst = MultiphaseInstance::from_masks(n, &vec![0u64; k], 0, 0.5);
        let mut set_masks = vec![0u64; k];
        for s_combined in 0..1u64 << (n * k) {
            for (f, m) in set_masks.iter_mut().enumerate() {
                *m = s_combined >> (f * n) & ((1u64 << n) - 1);
            }
            for t_mask in 0..1u64 << n {
                inst.overwrite_masks(&set_masks, t_mask);
                for i in 0..k {
                    let direct = run_one_point_five(&proto, &inst, i);
                    assert_eq!(direct.answer, inst.answer(i), "1.5-round protocol must be zero-error");
                    let tx = run_protocol(&wrapped, &inst, i).unwrap();
                    assert_eq!(tx.answer, direct.answer, "simulation must match");
                    assert!(
                        tx.megan.len() <= 2 * direct.c_bits,
                        "|Pi^M| = {} > 2C = {}",
                        tx.megan.len(),
                        2 * direct.c_bits
                    );
                    *runs += 1;
                }
            }
        }
    }
    exhaust(ForwardNothing, 4, 2, &mut runs);
    exhaust(ForwardNothing, 3, 3, &mut runs);
    exhaust(ForwardPrefix, 4, 2, &mut runs);
    exhaust(ForwardPrefix, 3, 3, &mut runs);
    let elapsed = start.elapsed().as_secs_f64();
    finish(
        10,
        "one-point-five-simulation",
        true,
        format!("{runs} enumerated runs with identical answers and |Pi^M| <= 2C, {elapsed:.1}s"),
    );
}

//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

mod common;

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use discretum::dispersion::{
    chain_dispersion, cutoff_report, sound_speed, OscillatorParams, PhysicalConstants, PROTON_MASS,
};
use discretum::dynamics::{
    init_plane_wave, mode_energies, to_modes, total_energy, ChainState, ModeBasis,
};
use discretum::lattice::{fold_to_bz, g_vector, lattice_phase, LatticeBasis};
use discretum::quantum_bridge::{
    build_qp_matrices, commutator_defect, ground_energy, medium_atom_mass, planck_from_lattice,
    projected_hamiltonian, reduce_mode_hamiltonian, spectrum, NcExpression, RelationInputs,
};
use discretum::scattering::{
    enumerate_three_phonon, kmc_ensemble, mean_abs_drift, Direction, KmcMode, KmcTrace, ModeGrid,
    PhononPopulation, ScatteringEvent,
};

use common::{brute_force_triples, random_basis, zero_crossing_frequency};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn unit() -> OscillatorParams {
    OscillatorParams::new(1.0, 1.0, 1.0).unwrap()
}

fn folding() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_fold: f64 = 0.0;
    let mut worst_phase: f64 = 0.0;
    for trial in 0..1000 {
        let dim = 1 + trial % 3;
        let vectors = random_basis(&mut rng, dim);
        let basis = LatticeBasis::new(&vectors).unwrap();
        let recip = basis.reciprocal();
        let k: Vec<f64> = (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect();
        let mut idx = [0i64; 3];
        for i in idx.iter_mut().take(dim) {
            *i = rng.random_range(-3..=3);
        }
        let g = g_vector(&recip, idx[0], idx[1], idx[2]);
        let shifted: Vec<f64> = (0..dim).map(|i| k[i] + g.cartesian[i]).collect();
        let a = fold_to_bz(&recip, &k).unwrap();
        let b = fold_to_bz(&recip, &shifted).unwrap();
        worst_fold = worst_fold.max(common::max_abs_diff(&a.k_folded, &b.k_folded));

        let rho: Vec<f64> = (0..dim).map(|_| rng.random_range(-5..=5) as f64).collect();
        let phase = lattice_phase(&g, &basis, &rho).unwrap();
        worst_phase = worst_phase.max((phase - 1.0).norm());
    }
    Outcome::new(
        worst_fold < 1e-9 && worst_phase < 1e-12,
        format!("max fold mismatch {worst_fold:.2e}, max |phase - 1| {worst_phase:.2e}"),
    )
}

fn cutoff_chain() -> Outcome {
    let consts = PhysicalConstants::default();
    let r = cutoff_report(&consts, 1e21, PROTON_MASS, 1e-9).unwrap();
    let a_s = r.stated.a_s;
    let exact_ok = (r.exact.p_cut - 5.34e-7).abs() < 0.01e-7;
    let bz = discretum::dispersion::bz_extent(1e-25).unwrap();
    let pass = (6.0e-25..=7.0e-25).contains(&a_s)
        && exact_ok
        && r.inconsistent
        && (1e25..1e26).contains(&bz);
    Outcome::new(
        pass,
        format!(
            "a_s(1e-9) = {a_s:.4e} m, exact p = {:.4e}, flagged = {}, bz_extent(1e-25) = {bz:.4e}",
            r.exact.p_cut, r.inconsistent
        ),
    )
}

fn energy_conservation() -> Outcome {
    let params = unit();
    let mut s = ChainState::random(64, params, 1.0, 3).unwrap();
    let dt = 0.02 / params.omega_max();
    let e0 = total_energy(&s);
    let mut worst: f64 = 0.0;
    for _ in 0..100_000 {
        s.step(dt).unwrap();
        worst = worst.max((total_energy(&s) - e0).abs() / e0);
    }
    Outcome::new(
        worst < 1e-6,
        format!("max relative energy deviation {worst:.2e} over 1e5 steps"),
    )
}

fn parseval() -> Outcome {
    let params = OscillatorParams::new(1.3, 0.8, 1.1).unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let n = [8, 17, 32, 64][seed as usize % 4];
        let basis = ModeBasis::new(n).unwrap();
        let s = ChainState::random(n, params, 2.0, seed).unwrap();
        let e = total_energy(&s);
        let sum: f64 = mode_energies(&to_modes(&s, &basis).unwrap()).iter().sum();
        worst = worst.max((e - sum).abs() / e);
    }
    Outcome::new(
        worst < 1e-9,
        format!("max relative mismatch {worst:.2e} on 100 states"),
    )
}

fn dispersion_agreement() -> Outcome {
    let params = OscillatorParams::new(1.7, 0.9, 1.3).unwrap();
    let n_sites = 64;
    let mut worst: f64 = 0.0;
    let mut slope_err = f64::NAN;
    for mode in [1i64, 8, 16, 32] {
        let k = 2.0 * PI * mode as f64 / (n_sites as f64 * params.a());
        let w = chain_dispersion(&params, k);
        let dt = 1e-3 / w;
        let mut s = init_plane_wave(n_sites, params, mode, 1.0).unwrap();
        let mut trace = vec![s.u()[0]];
        for _ in 0..10_000 {
            s.step(dt).unwrap();
            trace.push(s.u()[0]);
        }
        let Some(measured) = zero_crossing_frequency(&trace, dt) else {
            return Outcome::new(false, format!("mode {mode}: fewer than two zero crossings"));
        };
        worst = worst.max((measured - w).abs() / w);
        if mode == 1 {
            let vs = sound_speed(&params);
            slope_err = (measured / k - vs).abs() / vs;
        }
    }
    Outcome::new(
        worst < 1e-3 && slope_err < 1e-3,
        format!("max frequency error {worst:.2e}, small-q slope error {slope_err:.2e}"),
    )
}

fn mode_decoupling() -> Outcome {
    let params = unit();
    let n_sites = 64;
    let basis = ModeBasis::new(n_sites).unwrap();
    let dt = 0.02 / params.omega_max();
    let mut worst: f64 = 0.0;
    for mode in [3i64, 13, -20] {
        let mut s = init_plane_wave(n_sites, params, mode, 0.8).unwrap();
        let pair = [basis.slot(mode), basis.slot(-mode)];
        for step in 0..=10_000 {
            if step > 0 {
                s.step(dt).unwrap();
            }
            let e = mode_energies(&to_modes(&s, &basis).unwrap());
            let total: f64 = e.iter().sum();
            let leaked: f64 = e
                .iter()
                .enumerate()
                .filter(|(j, _)| !pair.contains(j))
                .map(|(_, x)| x)
                .sum();
            worst = worst.max(leaked / total);
        }
    }
    Outcome::new(
        worst <= 1e-10,
        format!("max energy leaked outside the +/-k pair {worst:.2e}"),
    )
}

fn scattering_oracle() -> Outcome {
    let params = unit();
    let mut checked = 0;
    for n in [4usize, 8, 16] {
        let grid = ModeGrid::new(n, params).unwrap();
        for f in [0.0, 0.1, 0.2] {
            let tol = f * grid.omega_max();
            let got: std::collections::BTreeSet<_> = enumerate_three_phonon(&grid, tol)
                .unwrap()
                .iter()
                .map(|e| (e.n1, e.n2, e.n3, e.g))
                .collect();
            let want = brute_force_triples(n, 1.0, 1.0, tol);
            if got != want {
                return Outcome::new(
                    false,
                    format!("N={n} tol={f}: {} vs {} events", got.len(), want.len()),
                );
            }
            checked += want.len();
        }
    }
    Outcome::new(
        true,
        format!("9 configurations identical, {checked} events in total"),
    )
}

/// Replays a trace against the event table on a plain map and checks every
/// drift increment and the recomputed drift.
fn replay_ledger(
    trace: &KmcTrace,
    initial: &PhononPopulation,
    events: &[ScatteringEvent],
    n: i64,
) -> Result<(), String> {
    let mut occ: HashMap<i64, i64> = initial.iter().map(|(l, c)| (l, c as i64)).collect();
    let drift = |occ: &HashMap<i64, i64>| occ.iter().map(|(l, c)| l * c).sum::<i64>();
    if drift(&occ) != trace.rows[0].drift {
        return Err("initial drift mismatch".into());
    }
    for w in trace.rows.windows(2) {
        let (prev, row) = (&w[0], &w[1]);
        let e = &events[row.event.ok_or("missing event index")?];
        let g = match row.direction.ok_or("missing direction")? {
            Direction::Merge => {
                *occ.entry(e.n1).or_default() -= 1;
                *occ.entry(e.n2).or_default() -= 1;
                *occ.entry(e.n3).or_default() += 1;
                e.g
            }
            Direction::Split => {
                *occ.entry(e.n3).or_default() -= 1;
                *occ.entry(e.n1).or_default() += 1;
                *occ.entry(e.n2).or_default() += 1;
                -e.g
            }
        };
        if occ.values().any(|&c| c < 0) {
            return Err(format!("negative occupation at step {}", row.step));
        }
        if row.event_g != g || row.drift - prev.drift != -g * n || row.drift != drift(&occ) {
            return Err(format!("ledger broken at step {}", row.step));
        }
    }
    Ok(())
}

fn momentum_ledger() -> Outcome {
    let n_sites = 32;
    let grid = ModeGrid::new(n_sites, unit()).unwrap();
    let events = enumerate_three_phonon(&grid, 0.5 * grid.omega_max()).unwrap();
    let mut initial = PhononPopulation::empty(&grid);
    for i in 0..100i64 {
        initial.add(1 + i % 15, 1).unwrap();
    }
    let seeds: Vec<u64> = (0..32).collect();
    let d0 = initial.drift() as f64;

    let all = kmc_ensemble(&grid, &initial, &events, 10_000, &seeds, KmcMode::All).unwrap();
    for t in &all {
        if let Err(e) = replay_ledger(t, &initial, &events, n_sites as i64) {
            return Outcome::new(false, e);
        }
    }
    let normal = kmc_ensemble(
        &grid,
        &initial,
        &events,
        10_000,
        &seeds,
        KmcMode::NormalOnly,
    )
    .unwrap();
    for t in &normal {
        if let Err(e) = replay_ledger(t, &initial, &events, n_sites as i64) {
            return Outcome::new(false, e);
        }
        if t.rows.iter().any(|r| r.drift != t.rows[0].drift) {
            return Outcome::new(false, "normal-only run changed the drift");
        }
    }

    let mean_abs = mean_abs_drift(&all);
    let (best_step, best) =
        mean_abs.iter().enumerate().fold(
            (0, f64::INFINITY),
            |acc, (i, &m)| if m < acc.1 { (i, m) } else { acc },
        );
    let signed = all.iter().map(|t| t.final_drift() as f64).sum::<f64>() / all.len() as f64;
    Outcome::new(
        best < 0.1 * d0.abs(),
        format!(
            "ledger exact on 64 traces; min ensemble-mean |drift| / initial = {:.3} (step {best_step}), \
             final = {:.3}, |mean signed drift| / initial = {:.3}",
            best / d0.abs(),
            mean_abs.last().unwrap() / d0.abs(),
            signed.abs() / d0.abs()
        ),
    )
}

fn commutator_and_ground_state() -> Outcome {
    let n = 64;
    let (q, p) = build_qp_matrices(n, 1.0, 1.0, 1.0).unwrap();
    let c = commutator_defect(&q, &p, 1.0).unwrap();
    let e0 = ground_energy(&q, &p, 1.0, 1.0).unwrap();
    let levels = spectrum(&projected_hamiltonian(n, 1.0, 1.0, 1.0).unwrap());
    let spec_err = levels
        .iter()
        .enumerate()
        .map(|(j, e)| (e - (j as f64 + 0.5)).abs())
        .fold(0.0, f64::max);
    Outcome::new(
        c.max_defect < 1e-12 && (e0 - 0.5).abs() < 1e-12 && spec_err < 1e-10 && levels.len() == n,
        format!(
            "defect {:.2e}, |E0 - 1/2| {:.2e}, spectrum error {spec_err:.2e}",
            c.max_defect,
            (e0 - 0.5).abs()
        ),
    )
}

fn symbolic_reduction() -> Outcome {
    let r = reduce_mode_hamiltonian();
    let pass =
        r == NcExpression::half_omega_commutator() && r.commutative_specialization().is_zero();
    Outcome::new(pass, format!("reduced form: {r}"))
}

fn planck_roundtrip() -> Outcome {
    let consts = PhysicalConstants::default();
    let m = medium_atom_mass(&consts, 1e-25).unwrap();
    let inputs = RelationInputs::with_light_speed(m, 1e-25, consts).unwrap();
    let rel = (planck_from_lattice(&inputs) - consts.h).abs() / consts.h;
    Outcome::new(
        (m - 2.21e-17).abs() < 0.005e-17 && rel < 1e-12,
        format!("mass {m:.4e} kg, roundtrip relative error {rel:.2e}"),
    )
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_discretum"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let basis = dir.path().join("basis.json");
    fs::write(&basis, r#"{"dim": 2, "vectors": [[1.0, 0.2], [0.3, 1.1]]}"#).unwrap();
    let sim = dir.path().join("sim.json");
    fs::write(
        &sim,
        r#"{"n_sites": 16, "steps": 400, "stride": 20, "init": {"type": "random", "seed": 5}}"#,
    )
    .unwrap();
    let b = basis.to_str().unwrap();
    let s = sim.to_str().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["fold", "--basis", b, "--k", "3.7,-8.1"],
        vec!["processes", "--n", "16", "--tol", "0.2"],
        vec![
            "thermalize",
            "--seed",
            "11",
            "--tol",
            "0.5",
            "--events",
            "3000",
        ],
        vec![
            "thermalize",
            "--seed",
            "11",
            "--tol",
            "0.5",
            "--events",
            "500",
            "--format",
            "json",
        ],
        vec!["simulate", "--config", s],
        vec!["simulate", "--config", s, "--seed", "9"],
        vec!["dispersion", "--q-samples", "33"],
        vec!["cutoff"],
        vec!["commutator", "--N", "32"],
        vec!["planck"],
    ];
    for args in &runs {
        let first = match run_cli(args) {
            Ok(o) => o,
            Err(e) => return Outcome::new(false, e),
        };
        let second = run_cli(args).unwrap_or_default();
        if first != second || first.is_empty() {
            return Outcome::new(false, format!("{args:?} differs between runs"));
        }
    }
    let out_path = dir.path().join("trace.csv");
    let o = out_path.to_str().unwrap();
    let mut files = Vec::new();
    for _ in 0..2 {
        if let Err(e) = run_cli(&["thermalize", "--seed", "3", "--tol", "0.5", "--output", o]) {
            return Outcome::new(false, e);
        }
        files.push(fs::read(Path::new(o)).unwrap());
    }
    Outcome::new(
        files[0] == files[1],
        format!("{} invocations repeated byte for byte", runs.len() + 1),
    )
}

type Check = (&'static str, Option<Duration>, fn() -> Outcome);

fn main() -> ExitCode {
    let checks: [Check; 12] = [
        ("folding suite", Some(Duration::from_secs(1)), folding),
        ("cutoff chain", None, cutoff_chain),
        (
            "energy conservation",
            Some(Duration::from_secs(5)),
            energy_conservation,
        ),
        ("Parseval identity", None, parseval),
        (
            "dispersion agreement",
            Some(Duration::from_secs(10)),
            dispersion_agreement,
        ),
        ("mode decoupling", None, mode_decoupling),
        (
            "scattering oracle",
            Some(Duration::from_secs(1)),
            scattering_oracle,
        ),
        (
            "momentum ledger",
            Some(Duration::from_secs(30)),
            momentum_ledger,
        ),
        (
            "commutator and ground state",
            Some(Duration::from_secs(1)),
            commutator_and_ground_state,
        ),
        ("symbolic reduction", None, symbolic_reduction),
        ("Planck roundtrip", None, planck_roundtrip),
        ("determinism", None, determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let mut outcome = check();
        let elapsed = start.elapsed();
        if let Some(limit) = budget {
            if elapsed > *limit {
                outcome.pass = false;
                outcome
                    .detail
                    .push_str(&format!("; over the {limit:?} budget"));
            }
        }
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {} ({:.2?})",
            if outcome.pass { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail,
            elapsed
        );
    }
    println!("{} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

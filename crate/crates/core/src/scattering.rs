//! Three-phonon processes `k1 + k2 = k3 + G` on the chain's mode grid and a
//! kinetic Monte Carlo phonon gas built on them.
//!
//! Wave numbers are carried as integer labels `n` with `k_n = 2πn/(Na)` and
//! `n` in `(-N/2, N/2]`, so momentum bookkeeping is exact integer arithmetic.
//! Umklapp processes move `g·N` units of quasi-momentum into the lattice.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dispersion::{chain_dispersion, OscillatorParams};
use crate::error::{invalid, Result};

/// Discrete wave numbers of an `N`-site periodic chain with their frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    n_sites: usize,
    params: OscillatorParams,
    lo: i64,
    omega: Vec<f64>,
}

impl ModeGrid {
    pub fn new(n_sites: usize, params: OscillatorParams) -> Result<Self> {
        if n_sites < 2 {
            return Err(invalid(
                "n_sites",
                format!("need at least 2 sites, got {n_sites}"),
            ));
        }
        let n = n_sites as i64;
        let lo = -((n - 1) / 2);
        let omega = (lo..=n / 2)
            .map(|label| chain_dispersion(&params, wave_number(label, n_sites, params.a())))
            .collect();
        Ok(ModeGrid {
            n_sites,
            params,
            lo,
            omega,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn params(&self) -> &OscillatorParams {
        &self.params
    }

    /// All labels in increasing order.
    pub fn labels(&self) -> impl Iterator<Item = i64> + '_ {
        self.lo..=self.hi()
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.n_sites as i64 / 2
    }

    pub fn contains(&self, label: i64) -> bool {
        (self.lo..=self.hi()).contains(&label)
    }

    pub(crate) fn slot(&self, label: i64) -> usize {
        debug_assert!(self.contains(label));
        (label - self.lo) as usize
    }

    /// Reduces any integer to its label in `(-N/2, N/2]`.
    pub fn fold_label(&self, n: i64) -> i64 {
        (n - self.lo).rem_euclid(self.n_sites as i64) + self.lo
    }

    pub fn wave_number(&self, label: i64) -> f64 {
        wave_number(label, self.n_sites, self.params.a())
    }

    pub fn omega(&self, label: i64) -> f64 {
        self.omega[self.slot(label)]
    }

    pub fn omega_max(&self) -> f64 {
        self.params.omega_max()
    }
}

pub(crate) fn wave_number(label: i64, n_sites: usize, a: f64) -> f64 {
    2.0 * std::f64::consts::PI * label as f64 / (n_sites as f64 * a)
}

/// Merge `n1 + n2 → n3` with `n1 + n2 = n3 + g·N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringEvent {
    pub n1: i64,
    pub n2: i64,
    pub n3: i64,
    pub g: i64,
    pub delta_omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    Normal,
    Umklapp,
}

impl ProcessKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProcessKind::Normal => "normal",
            ProcessKind::Umklapp => "umklapp",
        }
    }
}

pub fn classify(event: &ScatteringEvent) -> ProcessKind {
    if event.g == 0 {
        ProcessKind::Normal
    } else {
        ProcessKind::Umklapp
    }
}

fn events_from(grid: &ModeGrid, n1: i64, tol_omega: f64) -> Vec<ScatteringEvent> {
    let n = grid.n_sites as i64;
    (n1..=grid.hi())
        .filter(|&n2| n2 != 0)
        .filter_map(|n2| {
            let n3 = grid.fold_label(n1 + n2);
            if n3 == 0 {
                return None;
            }
            let delta_omega = (grid.omega(n1) + grid.omega(n2) - grid.omega(n3)).abs();
            (delta_omega <= tol_omega).then(|| ScatteringEvent {
                n1,
                n2,
                n3,
                g: (n1 + n2 - n3) / n,
                delta_omega,
            })
        })
        .collect()
}

fn check_tol(tol_omega: f64) -> Result<()> {
    if tol_omega >= 0.0 {
        Ok(())
    } else {
        Err(invalid(
            "tol_omega",
            format!("must be >= 0, got {tol_omega}"),
        ))
    }
}

/// All momentum-conserving merges `n1 ≤ n2 → n3` (modulo `N`) whose frequency
/// mismatch is within `tol_omega`. The zero mode never takes part. Ordered by
/// `(n1, n2)`.
pub fn enumerate_three_phonon(grid: &ModeGrid, tol_omega: f64) -> Result<Vec<ScatteringEvent>> {
    check_tol(tol_omega)?;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let firsts: Vec<i64> = grid.labels().filter(|&n| n != 0).collect();
        let chunks: Vec<Vec<ScatteringEvent>> = firsts
            .par_iter()
            .map(|&n1| events_from(grid, n1, tol_omega))
            .collect();
        Ok(chunks.into_iter().flatten().collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        enumerate_three_phonon_sequential(grid, tol_omega)
    }
}

pub fn enumerate_three_phonon_sequential(
    grid: &ModeGrid,
    tol_omega: f64,
) -> Result<Vec<ScatteringEvent>> {
    check_tol(tol_omega)?;
    Ok(grid
        .labels()
        .filter(|&n| n != 0)
        .flat_map(|n1| events_from(grid, n1, tol_omega))
        .collect())
}

/// Integer occupation numbers per mode label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhononPopulation {
    lo: i64,
    occupation: Vec<u64>,
    #[serde(skip)]
    omega: Vec<f64>,
    drift: i64,
}

impl PhononPopulation {
    pub fn empty(grid: &ModeGrid) -> Self {
        PhononPopulation {
            lo: grid.lo,
            occupation: vec![0; grid.omega.len()],
            omega: grid.omega.clone(),
            drift: 0,
        }
    }

    fn slot(&self, label: i64) -> Result<usize> {
        let s = label - self.lo;
        if s < 0 || s as usize >= self.occupation.len() {
            return Err(invalid("label", format!("{label} is not on the grid")));
        }
        Ok(s as usize)
    }

    /// Adds `count` phonons to mode `label`.
    pub fn add(&mut self, label: i64, count: u64) -> Result<()> {
        let s = self.slot(label)?;
        self.occupation[s] += count;
        self.drift += label * count as i64;
        Ok(())
    }

    pub fn occupation(&self, label: i64) -> u64 {
        self.slot(label).map(|s| self.occupation[s]).unwrap_or(0)
    }

    /// `(label, occupation)` pairs in label order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.occupation
            .iter()
            .enumerate()
            .map(move |(i, &o)| (self.lo + i as i64, o))
    }

    pub fn phonon_count(&self) -> u64 {
        self.occupation.iter().sum()
    }

    /// Cached `Σ occupation·n`.
    pub fn drift(&self) -> i64 {
        self.drift
    }

    /// `Σ occupation·ω` in units with `ħ = 1`, summed in label order.
    pub fn total_energy(&self) -> f64 {
        self.occupation
            .iter()
            .zip(&self.omega)
            .map(|(&o, &w)| o as f64 * w)
            .sum()
    }

    fn take(&mut self, label: i64) {
        let s = (label - self.lo) as usize;
        self.occupation[s] -= 1;
        self.drift -= label;
    }

    fn put(&mut self, label: i64) {
        let s = (label - self.lo) as usize;
        self.occupation[s] += 1;
        self.drift += label;
    }

    fn can_merge(&self, e: &ScatteringEvent) -> bool {
        let o1 = self.occupation[(e.n1 - self.lo) as usize];
        if e.n1 == e.n2 {
            o1 >= 2
        } else {
            o1 >= 1 && self.occupation[(e.n2 - self.lo) as usize] >= 1
        }
    }

    fn can_split(&self, e: &ScatteringEvent) -> bool {
        self.occupation[(e.n3 - self.lo) as usize] >= 1
    }
}

/// Total quasi-momentum `Σ occupation(n)·n` in grid units, recomputed.
pub fn total_quasimomentum(pop: &PhononPopulation) -> i64 {
    pop.iter().map(|(n, o)| n * o as i64).sum()
}

/// Which processes the Monte Carlo is allowed to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KmcMode {
    NormalOnly,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Merge,
    Split,
}

/// One sample of the trace. Row 0 is the initial state with no event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub event: Option<usize>,
    pub direction: Option<Direction>,
    /// Umklapp count of the applied process as oriented (negated for splits).
    pub event_g: i64,
    pub drift: i64,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KmcStatus {
    Completed,
    /// No event could be applied at this step.
    Stalled {
        step: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KmcTrace {
    pub rows: Vec<TraceRow>,
    pub status: KmcStatus,
    pub final_population: PhononPopulation,
}

impl KmcTrace {
    pub fn initial_drift(&self) -> i64 {
        self.rows[0].drift
    }

    pub fn final_drift(&self) -> i64 {
        self.rows.last().map(|r| r.drift).unwrap_or(0)
    }
}

/// Kinetic Monte Carlo over a fixed event table.
///
/// Each step collects every applicable (event, direction) pair: a merge needs
/// both inputs occupied, a split needs the output mode occupied. One pair is
/// drawn uniformly and applied. The run stops early if nothing applies.
pub fn kmc_run(
    grid: &ModeGrid,
    initial: &PhononPopulation,
    events: &[ScatteringEvent],
    n_events: usize,
    seed: u64,
    mode: KmcMode,
) -> Result<KmcTrace> {
    let table: Vec<(usize, &ScatteringEvent)> = events
        .iter()
        .enumerate()
        .filter(|(_, e)| mode == KmcMode::All || e.g == 0)
        .collect();
    if table.is_empty() {
        return Err(invalid(
            "events",
            format!("no events usable in {mode:?} mode"),
        ));
    }
    for (_, e) in &table {
        if !(grid.contains(e.n1) && grid.contains(e.n2) && grid.contains(e.n3)) {
            return Err(invalid("events", format!("event {e:?} is not on the grid")));
        }
    }
    if initial.occupation.len() != grid.omega.len() {
        return Err(invalid("initial", "population was built for another grid"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pop = initial.clone();
    let n = grid.n_sites as i64;
    let mut rows = Vec::with_capacity(n_events + 1);
    rows.push(TraceRow {
        step: 0,
        event: None,
        direction: None,
        event_g: 0,
        drift: pop.drift,
        energy: pop.total_energy(),
    });
    let mut status = KmcStatus::Completed;
    let mut options: Vec<(usize, Direction)> = Vec::with_capacity(2 * table.len());

    for step in 1..=n_events {
        options.clear();
        for (i, e) in &table {
            if pop.can_merge(e) {
                options.push((*i, Direction::Merge));
            }
            if pop.can_split(e) {
                options.push((*i, Direction::Split));
            }
        }
        if options.is_empty() {
            status = KmcStatus::Stalled { step };
            break;
        }
        let (idx, dir) = options[rng.random_range(0..options.len())];
        let e = &events[idx];
        let before = pop.drift;
        let event_g = match dir {
            Direction::Merge => {
                pop.take(e.n1);
                pop.take(e.n2);
                pop.put(e.n3);
                e.g
            }
            Direction::Split => {
                pop.take(e.n3);
                pop.put(e.n1);
                pop.put(e.n2);
                -e.g
            }
        };
        debug_assert_eq!(pop.drift - before, -event_g * n);
        rows.push(TraceRow {
            step,
            event: Some(idx),
            direction: Some(dir),
            event_g,
            drift: pop.drift,
            energy: pop.total_energy(),
        });
    }

    Ok(KmcTrace {
        rows,
        status,
        final_population: pop,
    })
}

/// Independent runs, one per seed, in parallel when the `parallel` feature is on.
/// Results are returned in seed order.
pub fn kmc_ensemble(
    grid: &ModeGrid,
    initial: &PhononPopulation,
    events: &[ScatteringEvent],
    n_events: usize,
    seeds: &[u64],
    mode: KmcMode,
) -> Result<Vec<KmcTrace>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        seeds
            .par_iter()
            .map(|&s| kmc_run(grid, initial, events, n_events, s, mode))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        kmc_ensemble_sequential(grid, initial, events, n_events, seeds, mode)
    }
}

pub fn kmc_ensemble_sequential(
    grid: &ModeGrid,
    initial: &PhononPopulation,
    events: &[ScatteringEvent],
    n_events: usize,
    seeds: &[u64],
    mode: KmcMode,
) -> Result<Vec<KmcTrace>> {
    seeds
        .iter()
        .map(|&s| kmc_run(grid, initial, events, n_events, s, mode))
        .collect()
}

/// Ensemble mean of `|drift|` at each step, for traces that all ran the full budget.
pub fn mean_abs_drift(traces: &[KmcTrace]) -> Vec<f64> {
    let len = traces.iter().map(|t| t.rows.len()).min().unwrap_or(0);
    (0..len)
        .map(|i| {
            traces
                .iter()
                .map(|t| t.rows[i].drift.abs() as f64)
                .sum::<f64>()
                / traces.len() as f64
        })
        .collect()
}

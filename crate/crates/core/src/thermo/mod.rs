//! Battery/bath thermodynamics: level manipulation with work accounting,
//! memoryless Gibbs thermalization, and the quasistatic erasure and
//! work-extraction schedules.
//!
//! Energies are in units of kT; work is in units of kT·ln 2. Bath contact
//! replaces the system state with the Gibbs state at the current level
//! energies. Work accounting uses the ensemble-average occupancy of the
//! shifted levels; a seeded single-trajectory mode backs the
//! failure-probability experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::quantum::{basis_state, gibbs_weights, DensityOperator, PureState};

mod process;

pub use process::{
    erase_levels, erase_mixed, extract_from_occupancies, extract_work_levels, extract_work_pure,
};

const LN2: f64 = std::f64::consts::LN_2;

/// Quasistatic schedule: raise/lower in steps of `delta` (kT) up to `e_max`
/// (kT), at inverse temperature `beta` (energies are already in kT, so the
/// default is 1).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScheduleConfig {
    #[serde(default = "default_e_max")]
    pub e_max: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
}

fn default_e_max() -> f64 {
    30.0
}
fn default_delta() -> f64 {
    0.01
}
fn default_beta() -> f64 {
    1.0
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            e_max: default_e_max(),
            delta: default_delta(),
            beta: default_beta(),
        }
    }
}

impl ScheduleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.e_max <= 0.0 || self.delta <= 0.0 || self.beta < 0.0 {
            return Err(CoreError::InvalidArgument(
                "schedule requires e_max > 0, delta > 0, beta ≥ 0".into(),
            ));
        }
        Ok(())
    }
}

/// Ideal work reservoir; `charge` is in kT·ln 2.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct Battery {
    pub charge: f64,
}

impl Battery {
    pub fn new(charge: f64) -> Self {
        Self { charge }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub step: usize,
    pub label: String,
    /// Energy transferred to the system in this step, kT·ln 2 (positive:
    /// battery paid; negative: battery gained).
    pub d_e: f64,
    /// Occupancy of the shifted levels at the time of the shift.
    pub occupancy: f64,
    pub cumulative: f64,
}

/// Ordered record of energy transfers; `total` is the process work cost in
/// kT·ln 2 (positive = work performed on the system).
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct WorkLedger {
    pub entries: Vec<LedgerEntry>,
    pub total: f64,
}

impl WorkLedger {
    pub fn push(&mut self, label: &str, d_e: f64, occupancy: f64) {
        self.total += d_e;
        self.entries.push(LedgerEntry {
            step: self.entries.len(),
            label: label.to_string(),
            d_e,
            occupancy,
            cumulative: self.total,
        });
    }

    /// CSV with header `step,label,dE_kTln2,occupancy,cumulative_kTln2`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,label,dE_kTln2,occupancy,cumulative_kTln2\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.step, e.label, e.d_e, e.occupancy, e.cumulative
            ));
        }
        out
    }
}

/// A system of discrete levels with classical occupancies (diagonal state).
#[derive(Clone, Debug)]
pub struct LevelSystem {
    pub energies: Vec<f64>,
    occupancies: Vec<f64>,
}

impl LevelSystem {
    /// Degenerate levels at energy 0 with the given initial occupancies.
    pub fn degenerate(occupancies: Vec<f64>) -> Result<Self> {
        if occupancies.is_empty() {
            return Err(CoreError::InvalidArgument("no levels".into()));
        }
        let total: f64 = occupancies.iter().sum();
        if occupancies.iter().any(|&w| w < -1e-10) || (total - 1.0).abs() > 1e-8 {
            return Err(CoreError::InvalidState(format!(
                "occupancies must be a distribution (sum {total})"
            )));
        }
        Ok(Self {
            energies: vec![0.0; occupancies.len()],
            occupancies,
        })
    }

    pub fn fully_mixed(levels: usize) -> Result<Self> {
        Self::degenerate(vec![1.0 / levels as f64; levels])
    }

    pub fn pure_level(levels: usize, level: usize) -> Result<Self> {
        if level >= levels {
            return Err(CoreError::InvalidArgument("level out of range".into()));
        }
        let mut occ = vec![0.0; levels];
        occ[level] = 1.0;
        Self::degenerate(occ)
    }

    pub fn levels(&self) -> usize {
        self.energies.len()
    }

    pub fn occupancies(&self) -> &[f64] {
        &self.occupancies
    }

    /// The state as a diagonal density operator in the level basis.
    pub fn state(&self) -> DensityOperator {
        DensityOperator::diagonal(&self.occupancies, vec![self.levels()])
            .expect("occupancies form a valid diagonal state")
    }

    /// Average internal energy Σ Eᵢ pᵢ in kT·ln 2 units.
    pub fn internal_energy(&self) -> f64 {
        self.energies
            .iter()
            .zip(&self.occupancies)
            .map(|(e, p)| e * p)
            .sum::<f64>()
            / LN2
    }
}

/// Shift the energies of the target levels by `d_e` (kT), drawing the
/// average cost ⟨n⟩·ΔE from the battery (or storing the gain). Returns the
/// ledger entry describing the transfer.
pub fn shift_levels(
    sys: &mut LevelSystem,
    targets: &[usize],
    d_e: f64,
    battery: &mut Battery,
) -> Result<LedgerEntry> {
    if targets.iter().any(|&t| t >= sys.levels()) {
        return Err(CoreError::InvalidArgument("shift target out of range".into()));
    }
    let occupancy: f64 = targets.iter().map(|&t| sys.occupancies[t]).sum();
    for &t in targets {
        sys.energies[t] += d_e;
    }
    let work = occupancy * d_e / LN2;
    battery.charge -= work;
    Ok(LedgerEntry {
        step: 0,
        label: String::new(),
        d_e: work,
        occupancy,
        cumulative: 0.0,
    })
}

/// Bath contact: replace the occupancies with the Gibbs distribution at the
/// current energies. Returns the heat absorbed by the system (kT·ln 2).
/// Idempotent at fixed energies.
pub fn thermalize(sys: &mut LevelSystem, beta: f64) -> f64 {
    let before = sys.internal_energy();
    sys.occupancies = gibbs_weights(&sys.energies, beta);
    sys.internal_energy() - before
}

/// Probability that the process's initial projective check finds the system
/// outside the expected pure state: 1 − ⟨φ₀|ρ|φ₀⟩. Always bounded by the
/// trace distance to the expected state.
pub fn failure_probability(rho: &DensityOperator, expected: &PureState) -> Result<f64> {
    if rho.dim() != expected.dim() {
        return Err(CoreError::DimensionMismatch {
            expected: expected.dim(),
            got: rho.dim(),
        });
    }
    let v = expected.amplitudes();
    let mut overlap = 0.0;
    for i in 0..rho.dim() {
        for j in 0..rho.dim() {
            overlap += (v[i].conj() * rho.matrix()[(i, j)] * v[j]).re;
        }
    }
    Ok((1.0 - overlap).clamp(0.0, 1.0))
}

/// Optimal one-shot distinguishing probability ½(1 + δ(ρ, σ)).
pub fn distinguish_probability(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    Ok(0.5 * (1.0 + crate::quantum::trace_distance(rho, sigma)?))
}

/// Outcome of one stochastic extraction run.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TrajectoryOutcome {
    pub work_extracted: f64,
    pub initial_level: usize,
    /// False when the initial sample was outside the expected level, i.e.
    /// the "free" raise actually lifted the occupied level.
    pub succeeded: bool,
}

/// Single-trajectory extraction: the occupied level is sampled at every
/// thermalization; work increments are Bernoulli (full step energy if the
/// occupied level is in the shifted set). Deterministic for a fixed seed.
pub fn extraction_trajectory(
    initial_occupancies: &[f64],
    schedule: &ScheduleConfig,
    seed: u64,
) -> Result<TrajectoryOutcome> {
    schedule.validate()?;
    let n_levels = initial_occupancies.len();
    if n_levels < 2 {
        return Err(CoreError::InvalidArgument("need at least two levels".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial_level = sample_index(initial_occupancies, &mut rng);
    let mut energies = vec![0.0f64; n_levels];
    let mut work = 0.0f64;
    // raise all levels except 0; if the sampled level is among them the
    // battery pays the full lift
    for e in energies.iter_mut().skip(1) {
        *e = schedule.e_max;
    }
    if initial_level != 0 {
        work -= schedule.e_max / LN2;
    }
    let steps = (schedule.e_max / schedule.delta).round() as usize;
    for _ in 0..steps {
        let w = gibbs_weights(&energies, schedule.beta);
        let level = sample_index(&w, &mut rng);
        if level != 0 {
            work += schedule.delta / LN2;
        }
        for e in energies.iter_mut().skip(1) {
            *e -= schedule.delta;
        }
    }
    Ok(TrajectoryOutcome {
        work_extracted: work,
        initial_level,
        succeeded: initial_level == 0,
    })
}

fn sample_index(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x: f64 = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        x -= w;
        if x <= 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

/// |0…0⟩ on `qubits` qubits.
pub fn ground_state(qubits: usize) -> PureState {
    basis_state(0, vec![2; qubits.max(1)]).expect("ground state")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn raising_empty_levels_is_free() {
        let mut sys = LevelSystem::pure_level(4, 0).unwrap();
        let mut bat = Battery::default();
        let e = shift_levels(&mut sys, &[1, 2, 3], 10.0, &mut bat).unwrap();
        assert_abs_diff_eq!(e.d_e, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(bat.charge, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn raising_occupied_level_costs_de() {
        let mut sys = LevelSystem::pure_level(2, 1).unwrap();
        let mut bat = Battery::default();
        let e = shift_levels(&mut sys, &[1], 1.0, &mut bat).unwrap();
        assert_abs_diff_eq!(e.d_e, 1.0 / LN2, epsilon = 1e-12);
        assert_abs_diff_eq!(bat.charge, -1.0 / LN2, epsilon = 1e-12);
    }

    #[test]
    fn lowering_half_occupied_levels_gains_linearly() {
        let mut sys = LevelSystem::degenerate(vec![0.25; 4]).unwrap();
        let mut bat = Battery::default();
        // lower two levels (total occupancy 0.5) by Δ: battery gains 0.5Δ
        let e = shift_levels(&mut sys, &[2, 3], -0.1, &mut bat).unwrap();
        assert_abs_diff_eq!(e.d_e, -0.05 / LN2, epsilon = 1e-12);
        assert_abs_diff_eq!(bat.charge, 0.05 / LN2, epsilon = 1e-12);
    }

    #[test]
    fn thermalize_matches_gibbs_and_is_idempotent() {
        let mut sys = LevelSystem::pure_level(2, 0).unwrap();
        sys.energies[1] = 2.0;
        thermalize(&mut sys, 1.0);
        let want = 1.0 / (1.0 + 2f64.exp());
        assert_abs_diff_eq!(sys.occupancies()[1], want, epsilon = 1e-12);
        let heat = thermalize(&mut sys, 1.0);
        assert_abs_diff_eq!(heat, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_thermalization_is_uniform() {
        let mut sys = LevelSystem::pure_level(8, 3).unwrap();
        thermalize(&mut sys, 1.0);
        for &w in sys.occupancies() {
            assert_abs_diff_eq!(w, 0.125, epsilon = 1e-12);
        }
    }

    #[test]
    fn raised_block_occupancy_formula() {
        // N raised levels at gap G: total occupancy [1 + e^G/N]^{-1}
        let n = 7usize;
        let gap = 1.5;
        let mut sys = LevelSystem::fully_mixed(n + 1).unwrap();
        for i in 1..=n {
            sys.energies[i] = gap;
        }
        thermalize(&mut sys, 1.0);
        let total: f64 = (1..=n).map(|i| sys.occupancies()[i]).sum();
        assert_abs_diff_eq!(total, 1.0 / (1.0 + gap.exp() / n as f64), epsilon = 1e-12);
    }

    #[test]
    fn failure_probability_cases() {
        let expected = ground_state(1);
        let rho = expected.to_density();
        assert_abs_diff_eq!(failure_probability(&rho, &expected).unwrap(), 0.0, epsilon = 1e-12);
        let orth = basis_state(1, vec![2]).unwrap().to_density();
        assert_abs_diff_eq!(failure_probability(&orth, &expected).unwrap(), 1.0, epsilon = 1e-12);
        // ⟨φ₀|ρ|φ₀⟩ = 0.97 → 0.03, and bounded by the trace distance
        let rho = DensityOperator::diagonal(&[0.97, 0.03], vec![2]).unwrap();
        let p = failure_probability(&rho, &expected).unwrap();
        assert_abs_diff_eq!(p, 0.03, epsilon = 1e-12);
        let td = crate::quantum::trace_distance(&rho, &expected.to_density()).unwrap();
        assert!(p <= td + 1e-12);
    }

    #[test]
    fn distinguish_probability_cases() {
        let a = DensityOperator::maximally_mixed(vec![2]).unwrap();
        assert_abs_diff_eq!(distinguish_probability(&a, &a).unwrap(), 0.5, epsilon = 1e-12);
        let zero = basis_state(0, vec![2]).unwrap().to_density();
        let one = basis_state(1, vec![2]).unwrap().to_density();
        assert_abs_diff_eq!(distinguish_probability(&zero, &one).unwrap(), 1.0, epsilon = 1e-12);
        // δ = 0.2 pair → 0.6
        let p = DensityOperator::diagonal(&[0.6, 0.4], vec![2]).unwrap();
        let q = DensityOperator::diagonal(&[0.4, 0.6], vec![2]).unwrap();
        assert_abs_diff_eq!(distinguish_probability(&p, &q).unwrap(), 0.6, epsilon = 1e-12);
    }

    #[test]
    fn trajectory_failure_fraction_matches_initial_weight() {
        // initial weight 0.9 on the expected level: failure fraction ≈ 0.1
        let schedule = ScheduleConfig {
            e_max: 5.0,
            delta: 0.5,
            beta: 1.0,
        };
        let runs = 2000;
        let mut failures = 0;
        for s in 0..runs {
            let out = extraction_trajectory(&[0.9, 0.1], &schedule, s).unwrap();
            if !out.succeeded {
                failures += 1;
            }
        }
        let frac = failures as f64 / runs as f64;
        assert!((frac - 0.1).abs() < 0.03, "failure fraction {frac}");
        // determinism
        let a = extraction_trajectory(&[0.9, 0.1], &schedule, 42).unwrap();
        let b = extraction_trajectory(&[0.9, 0.1], &schedule, 42).unwrap();
        assert_eq!(a.work_extracted, b.work_extracted);
        assert_eq!(a.initial_level, b.initial_level);
    }
}

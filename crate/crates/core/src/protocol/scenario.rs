//! Scenario construction and the on-disk scenario schema.

use serde::{Deserialize, Serialize};

use crate::decoupling::{entangled_memory_state, max_entangled};
use crate::error::{CoreError, Result};
use crate::quantum::{
    basis_state, hermitian_eigen, tensor, C64, CVector, DensityOperator, PureState, RegisterLayout,
};
use crate::thermo::ScheduleConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioTag {
    /// Observer knows the exact pure state of S; classical description in O.
    Alice,
    /// Observer has no information; S fully mixed, O empty, Γ purifies S.
    Bob,
    /// Quantum memory: S maximally entangled with the first half of O, the
    /// second half of O maximally entangled with the reference in Γ.
    Quasimodo,
    /// Inline state and layout.
    Custom,
    /// Classical-diagonal i.i.d. source for rate experiments.
    Classical,
}

/// On-disk scenario description (JSON).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub tag: ScenarioTag,
    #[serde(default = "default_qubits")]
    pub qubits: usize,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    /// Haar draws per decoupling attempt.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub name: Option<String>,
    /// Enables joule output in transcripts.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub temperature_kelvin: Option<f64>,
    /// Custom tag: the global state (must be pure on the layout).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub state: Option<DensityOperator>,
    /// Custom tag: ordered blocks, must name S, O and Gamma.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub layout: Option<Vec<(String, usize)>>,
    /// Custom tag: reference qubit indices within the Gamma block
    /// (defaults to all of Gamma).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference_qubits: Option<Vec<usize>>,
    /// Classical tag: probability that S differs from the memory bit.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub flip_probability: Option<f64>,
    /// Copy counts for rate and i.i.d. experiments.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub copies: Option<Vec<usize>>,
}

fn default_qubits() -> usize {
    1
}
fn default_delta() -> f64 {
    0.03
}
fn default_samples() -> usize {
    64
}

impl ScenarioSpec {
    pub fn built_in(tag: ScenarioTag, qubits: usize) -> Self {
        Self {
            tag,
            qubits,
            epsilon: 0.0,
            delta: default_delta(),
            schedule: ScheduleConfig::default(),
            samples: default_samples(),
            name: None,
            temperature_kelvin: None,
            state: None,
            layout: None,
            reference_qubits: None,
            flip_probability: None,
            copies: None,
        }
    }
}

/// A fully built scenario: the global pure state, its layout, and the
/// protocol parameters.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub tag: ScenarioTag,
    pub qubits: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub schedule: ScheduleConfig,
    pub samples: usize,
    pub temperature_kelvin: Option<f64>,
    pub flip_probability: Option<f64>,
    pub global: PureState,
    pub layout: RegisterLayout,
    /// Global positions of the reference system R (inside Γ); never acted
    /// upon by any protocol step.
    pub reference_positions: Vec<usize>,
}

/// Build a scenario from its description.
pub fn build_scenario(spec: &ScenarioSpec) -> Result<Scenario> {
    spec.schedule.validate()?;
    if spec.epsilon < 0.0 || spec.epsilon >= 1.0 {
        return Err(CoreError::InvalidArgument(format!(
            "epsilon {} outside [0, 1)",
            spec.epsilon
        )));
    }
    if spec.delta <= 0.0 || spec.delta >= 1.0 {
        return Err(CoreError::InvalidArgument(format!(
            "delta {} outside (0, 1)",
            spec.delta
        )));
    }
    let n = spec.qubits;
    if n == 0 {
        return Err(CoreError::InvalidArgument("qubits must be ≥ 1".into()));
    }
    let (global, layout, reference) = match spec.tag {
        ScenarioTag::Alice => {
            // S in the known pure state |1…1⟩, a classical copy in O
            let d = 1usize << n;
            let s = basis_state(d - 1, vec![2; n])?;
            let o = basis_state(d - 1, vec![2; n])?;
            let joint = tensor(&s.to_density(), &o.to_density())?;
            let psi = dominant_vector(&joint)?;
            let layout = RegisterLayout::of(&[("S", n), ("O", n), ("Gamma", 0)])?;
            (psi, layout, Vec::new())
        }
        ScenarioTag::Bob => {
            // S fully mixed, no memory; Γ holds the purifier
            let phi = max_entangled(n); // (S, Γ)
            let layout = RegisterLayout::of(&[("S", n), ("O", 0), ("Gamma", n)])?;
            let psi = PureState::new(phi.amplitudes().clone(), vec![2; 2 * n])?;
            let reference = layout.block_positions("Gamma")?;
            (psi, layout, reference)
        }
        ScenarioTag::Quasimodo => {
            let (psi, layout) = entangled_memory_state(n)?;
            let reference = layout.block_positions("Gamma")?;
            (psi, layout, reference)
        }
        ScenarioTag::Custom => {
            let state = spec
                .state
                .as_ref()
                .ok_or_else(|| CoreError::InvalidArgument("custom scenario requires a state".into()))?;
            let blocks = spec
                .layout
                .as_ref()
                .ok_or_else(|| CoreError::InvalidArgument("custom scenario requires a layout".into()))?;
            let layout = RegisterLayout::new(blocks.clone())?;
            for required in ["S", "O", "Gamma"] {
                if !layout.has_block(required) {
                    return Err(CoreError::UnknownBlock(required.to_string()));
                }
            }
            if state.dim() != 1 << layout.total_qubits() {
                return Err(CoreError::DimensionMismatch {
                    expected: 1 << layout.total_qubits(),
                    got: state.dim(),
                });
            }
            let purity = state.purity();
            if purity < 1.0 - 1e-9 {
                return Err(CoreError::NotPure(purity));
            }
            let psi = dominant_vector(state)?;
            let gamma = layout.block_positions("Gamma")?;
            let reference = match &spec.reference_qubits {
                None => gamma,
                Some(rel) => {
                    let mut out = Vec::new();
                    for &r in rel {
                        let pos = *gamma.get(r).ok_or_else(|| {
                            CoreError::InvalidArgument(format!(
                                "reference qubit {r} outside the Gamma block"
                            ))
                        })?;
                        out.push(pos);
                    }
                    out
                }
            };
            (psi, layout, reference)
        }
        ScenarioTag::Classical => {
            // diagonal two-bit state: O uniform, S = O flipped w.p. `flip`
            let flip = spec.flip_probability.ok_or_else(|| {
                CoreError::InvalidArgument("classical scenario requires flip_probability".into())
            })?;
            if !(0.0..=1.0).contains(&flip) {
                return Err(CoreError::InvalidArgument(
                    "flip_probability outside [0, 1]".into(),
                ));
            }
            // purify onto Γ so the global-state invariant still holds:
            // |ψ⟩ = Σ_{s,o} √p(s,o) |s⟩|o⟩|s o⟩ with a two-qubit Γ record
            let mut v = CVector::zeros(16);
            let p = [
                0.5 * (1.0 - flip), // s=0,o=0
                0.5 * flip,         // s=0,o=1
                0.5 * flip,         // s=1,o=0
                0.5 * (1.0 - flip), // s=1,o=1
            ];
            for s in 0..2usize {
                for o in 0..2usize {
                    let idx = (s << 3) | (o << 2) | (s << 1) | o;
                    v[idx] = C64::new(p[(s << 1) | o].sqrt(), 0.0);
                }
            }
            let n2: f64 = v.iter().map(|a| a.norm_sqr()).sum();
            let v = v * C64::new(1.0 / n2.sqrt(), 0.0);
            let psi = PureState::new(v, vec![2; 4])?;
            let layout = RegisterLayout::of(&[("S", 1), ("O", 1), ("Gamma", 2)])?;
            let reference = layout.block_positions("Gamma")?;
            (psi, layout, reference)
        }
    };
    let name = spec.name.clone().unwrap_or_else(|| {
        format!("{:?}({})", spec.tag, n).to_lowercase()
    });
    Ok(Scenario {
        name,
        tag: spec.tag,
        qubits: layout.block_qubits("S")?,
        epsilon: spec.epsilon,
        delta: spec.delta,
        schedule: spec.schedule,
        samples: spec.samples,
        temperature_kelvin: spec.temperature_kelvin,
        flip_probability: spec.flip_probability,
        global,
        layout,
        reference_positions: reference,
    })
}

/// Extract the dominant eigenvector of an (approximately) pure state.
fn dominant_vector(rho: &DensityOperator) -> Result<PureState> {
    let (vals, vecs) = hermitian_eigen(rho.matrix());
    let kmax = (0..vals.len())
        .max_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap())
        .ok_or_else(|| CoreError::InvalidState("empty state".into()))?;
    let mut v = CVector::zeros(rho.dim());
    for i in 0..rho.dim() {
        v[i] = vecs[(i, kmax)];
    }
    let n2: f64 = v.iter().map(|a| a.norm_sqr()).sum();
    let v = v * C64::new(1.0 / n2.sqrt(), 0.0);
    let dims = if rho.dims().iter().all(|&d| d == 2) {
        rho.dims().to_vec()
    } else {
        vec![2; rho.dim().trailing_zeros() as usize]
    };
    PureState::new(v, dims)
}

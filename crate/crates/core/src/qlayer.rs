//! Quantum half of the dressed network.
//!
//! The circuit is: Hadamard on every wire, an RY embedding of the input
//! angles, then `depth` blocks of [CNOT entangler + trainable RY layer],
//! read out as one Pauli-Z expectation per wire. All trainable and input
//! angles enter through RY rotations, so the parameter-shift rule with
//! shift pi/2 gives exact gradients.

use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevec::{GateOp, StateVector, MAX_QUBITS};

/// Shift constant of the two-point parameter-shift rule; exact for RY.
pub const PARAM_SHIFT: f64 = std::f64::consts::FRAC_PI_2;

pub const MAX_DEPTH: usize = 64;

/// Circuit topology: wire count and number of [entangle + rotation] blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantumLayerConfig {
    n_qubits: usize,
    depth: usize,
}

impl QuantumLayerConfig {
    pub fn new(n_qubits: usize, depth: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(n_qubits));
        }
        if depth > MAX_DEPTH {
            return Err(Error::Argument(format!(
                "circuit depth {depth} exceeds maximum {MAX_DEPTH}"
            )));
        }
        Ok(QuantumLayerConfig { n_qubits, depth })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn shift(&self) -> f64 {
        PARAM_SHIFT
    }

    /// Squash features into rotation angles: tanh(x) * pi/2, strictly inside
    /// [-pi/2, pi/2]. (In double precision tanh saturates to exactly 1 near
    /// |x| ~ 19, so the bound is attained there rather than approached.)
    pub fn embed_angles(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.n_qubits {
            return Err(Error::Shape(format!(
                "expected {} features for angle embedding, got {}",
                self.n_qubits,
                features.len()
            )));
        }
        Ok(features.iter().map(|x| x.tanh() * PARAM_SHIFT).collect())
    }
}

/// Trainable rotation angles, one row per block, one column per wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    angles: Array2<f64>,
}

impl CircuitParams {
    pub fn new(config: &QuantumLayerConfig, angles: Array2<f64>) -> Result<Self> {
        if angles.dim() != (config.depth, config.n_qubits) {
            return Err(Error::Shape(format!(
                "params shape {:?} does not match config (depth {}, qubits {})",
                angles.dim(),
                config.depth,
                config.n_qubits
            )));
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::Argument("circuit params contain a non-finite angle".into()));
        }
        Ok(CircuitParams { angles })
    }

    pub fn zeros(config: &QuantumLayerConfig) -> Self {
        CircuitParams {
            angles: Array2::zeros((config.depth, config.n_qubits)),
        }
    }

    /// Small random init in [-0.01, 0.01]; keeps initial expectations close
    /// to the embedding-only circuit.
    pub fn seeded(config: &QuantumLayerConfig, rng: &mut impl rand::Rng) -> Self {
        let angles =
            Array2::from_shape_fn((config.depth, config.n_qubits), |_| rng.gen_range(-0.01..0.01));
        CircuitParams { angles }
    }

    pub fn angles(&self) -> &Array2<f64> {
        &self.angles
    }

    pub fn angles_mut(&mut self) -> &mut Array2<f64> {
        &mut self.angles
    }
}

/// Expand (config, params, input angles) into the explicit gate list.
///
/// Entangling blocks use a brick pattern: CNOT(q, q+1) for even q, then for
/// odd q, so every neighboring pair is coupled once per block.
pub fn circuit_ops(
    config: &QuantumLayerConfig,
    params: &CircuitParams,
    input_angles: &[f64],
) -> Result<Vec<GateOp>> {
    let n = config.n_qubits;
    if input_angles.len() != n {
        return Err(Error::Shape(format!(
            "expected {n} input angles, got {}",
            input_angles.len()
        )));
    }
    if params.angles.dim() != (config.depth, n) {
        return Err(Error::Shape(format!(
            "params shape {:?} does not match config (depth {}, qubits {n})",
            params.angles.dim(),
            config.depth
        )));
    }

    let mut ops = Vec::with_capacity(n * (2 + config.depth * 2));
    for q in 0..n {
        ops.push(GateOp::Hadamard { target: q });
    }
    for (q, &angle) in input_angles.iter().enumerate() {
        ops.push(GateOp::RotationY { target: q, angle });
    }
    for layer in 0..config.depth {
        for q in (0..n.saturating_sub(1)).step_by(2) {
            ops.push(GateOp::ControlledNot { control: q, target: q + 1 });
        }
        for q in (1..n.saturating_sub(1)).step_by(2) {
            ops.push(GateOp::ControlledNot { control: q, target: q + 1 });
        }
        for q in 0..n {
            ops.push(GateOp::RotationY { target: q, angle: params.angles[(layer, q)] });
        }
    }
    Ok(ops)
}

/// Simulate the layer and return one ⟨Z⟩ per wire, each in [-1, 1].
pub fn quantum_forward(
    config: &QuantumLayerConfig,
    params: &CircuitParams,
    input_angles: &[f64],
) -> Result<Vec<f64>> {
    let ops = circuit_ops(config, params, input_angles)?;
    let mut state = StateVector::zero(config.n_qubits)?;
    state.apply_circuit(&ops)?;
    (0..config.n_qubits).map(|w| state.expect_z(w)).collect()
}

/// Jacobian of the wire expectations with respect to every angle.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumJacobian {
    /// d expectation[k] / d params[(layer, qubit)], indexed [layer, qubit, k].
    /// Empty (shape [0, n, n]) when depth is 0.
    pub by_params: Array3<f64>,
    /// d expectation[k] / d input_angle[j], indexed [j, k].
    pub by_inputs: Array2<f64>,
}

/// Differentiate every expectation with respect to every trainable and input
/// angle via the two-point rule (e(phi + pi/2) - e(phi - pi/2)) / 2.
pub fn param_shift_grad(
    config: &QuantumLayerConfig,
    params: &CircuitParams,
    input_angles: &[f64],
) -> Result<QuantumJacobian> {
    let n = config.n_qubits;
    // validate shapes once up front so shifted runs cannot fail midway
    circuit_ops(config, params, input_angles)?;

    let mut by_params = Array3::zeros((config.depth, n, n));
    for layer in 0..config.depth {
        for q in 0..n {
            let mut shifted = params.clone();
            shifted.angles[(layer, q)] += PARAM_SHIFT;
            let plus = quantum_forward(config, &shifted, input_angles)?;
            shifted.angles[(layer, q)] -= 2.0 * PARAM_SHIFT;
            let minus = quantum_forward(config, &shifted, input_angles)?;
            for k in 0..n {
                by_params[(layer, q, k)] = (plus[k] - minus[k]) / 2.0;
            }
        }
    }

    let mut by_inputs = Array2::zeros((n, n));
    for j in 0..n {
        let mut shifted = input_angles.to_vec();
        shifted[j] += PARAM_SHIFT;
        let plus = quantum_forward(config, params, &shifted)?;
        shifted[j] -= 2.0 * PARAM_SHIFT;
        let minus = quantum_forward(config, params, &shifted)?;
        for k in 0..n {
            by_inputs[(j, k)] = (plus[k] - minus[k]) / 2.0;
        }
    }

    Ok(QuantumJacobian { by_params, by_inputs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn cfg(n: usize, depth: usize) -> QuantumLayerConfig {
        QuantumLayerConfig::new(n, depth).unwrap()
    }

    #[test]
    fn config_rejects_bad_dimensions() {
        assert!(QuantumLayerConfig::new(0, 1).is_err());
        assert!(QuantumLayerConfig::new(25, 1).is_err());
        assert!(QuantumLayerConfig::new(2, 65).is_err());
        assert!(QuantumLayerConfig::new(2, 0).is_ok());
        assert_eq!(cfg(2, 1).shift(), PI / 2.0);
    }

    #[test]
    fn embed_angle_examples() {
        let c = cfg(1, 0);
        assert_eq!(c.embed_angles(&[0.0]).unwrap(), vec![0.0]);

        let near_limit = c.embed_angles(&[10.0]).unwrap()[0];
        assert_abs_diff_eq!(near_limit, PI / 2.0, epsilon = 1e-6);
        assert!(near_limit < PI / 2.0);

        let one = c.embed_angles(&[1.0]).unwrap()[0];
        assert_abs_diff_eq!(one, 1.0_f64.tanh() * PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(one, 1.19631, epsilon = 1e-5);

        assert!(matches!(c.embed_angles(&[1.0, 2.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn embedded_angles_stay_inside_range() {
        // -15..15 keeps tanh strictly below 1 in f64; beyond ~19 it saturates
        let c = cfg(3, 0);
        for seed in 0..50u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let feats: Vec<f64> = (0..3).map(|_| rng.gen_range(-15.0..15.0)).collect();
            for a in c.embed_angles(&feats).unwrap() {
                assert!(a > -PI / 2.0 && a < PI / 2.0);
            }
        }
        // saturated inputs clamp to the bound exactly, never beyond
        for a in c.embed_angles(&[1e6, -1e6, 40.0]).unwrap() {
            assert!(a.abs() <= PI / 2.0);
        }
    }

    #[test]
    fn depth_zero_single_qubit_forward() {
        let c = cfg(1, 0);
        let p = CircuitParams::zeros(&c);
        let out = quantum_forward(&c, &p, &[0.0]).unwrap();
        assert_abs_diff_eq!(out[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn single_qubit_closed_form_matches_minus_sin() {
        let c = cfg(1, 0);
        let p = CircuitParams::zeros(&c);
        for k in 0..100 {
            let theta = -PI + 2.0 * PI * (k as f64) / 99.0;
            let out = quantum_forward(&c, &p, &[theta]).unwrap();
            assert_abs_diff_eq!(out[0], -theta.sin(), epsilon = 1e-12);
        }
    }

    #[test]
    fn two_qubit_block_matches_dense_simulation() {
        // depth=1, n=2, all angles zero: verify against the Kronecker oracle.
        let c = cfg(2, 1);
        let p = CircuitParams::zeros(&c);
        let out = quantum_forward(&c, &p, &[0.0, 0.0]).unwrap();

        let ops = circuit_ops(&c, &p, &[0.0, 0.0]).unwrap();
        let u = crate::oracle::circuit_unitary(2, &ops);
        let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); 4];
        amps[0] = num_complex::Complex64::new(1.0, 0.0);
        let dense = crate::oracle::apply_unitary(&u, &amps).unwrap();
        for (w, val) in out.iter().enumerate() {
            let oracle_z = crate::oracle::expect_z_dense(2, w, &dense).unwrap();
            assert_abs_diff_eq!(val, &oracle_z, epsilon = 1e-12);
            assert_abs_diff_eq!(val, &0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn forward_is_deterministic() {
        let c = cfg(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = CircuitParams::seeded(&c, &mut rng);
        let angles = [0.3, -0.7, 1.1];
        let a = quantum_forward(&c, &p, &angles).unwrap();
        let b = quantum_forward(&c, &p, &angles).unwrap();
        assert_eq!(a, b); // bitwise
    }

    #[test]
    fn outputs_bounded_for_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..25 {
            let n = rng.gen_range(1..=4);
            let depth = rng.gen_range(0..=3);
            let c = cfg(n, depth);
            let p = CircuitParams::seeded(&c, &mut rng);
            let angles: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            for e in quantum_forward(&c, &p, &angles).unwrap() {
                assert!((-1.0..=1.0).contains(&e));
            }
        }
    }

    #[test]
    fn gradient_at_zero_is_minus_one() {
        let c = cfg(1, 0);
        let p = CircuitParams::zeros(&c);
        let jac = param_shift_grad(&c, &p, &[0.0]).unwrap();
        assert_eq!(jac.by_params.dim(), (0, 1, 1));
        assert_abs_diff_eq!(jac.by_inputs[(0, 0)], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn gradient_vanishes_at_half_pi() {
        let c = cfg(1, 0);
        let p = CircuitParams::zeros(&c);
        let jac = param_shift_grad(&c, &p, &[PI / 2.0]).unwrap();
        assert_abs_diff_eq!(jac.by_inputs[(0, 0)], 0.0, epsilon = 1e-12);
    }

    /// Central finite differences over the whole angle set, the independent
    /// oracle for the shift rule.
    fn finite_diff_jacobian(
        c: &QuantumLayerConfig,
        p: &CircuitParams,
        angles: &[f64],
        h: f64,
    ) -> (Array3<f64>, Array2<f64>) {
        let n = c.n_qubits();
        let mut by_params = Array3::zeros((c.depth(), n, n));
        for layer in 0..c.depth() {
            for q in 0..n {
                let mut shifted = p.clone();
                shifted.angles_mut()[(layer, q)] += h;
                let plus = quantum_forward(c, &shifted, angles).unwrap();
                shifted.angles_mut()[(layer, q)] -= 2.0 * h;
                let minus = quantum_forward(c, &shifted, angles).unwrap();
                for k in 0..n {
                    by_params[(layer, q, k)] = (plus[k] - minus[k]) / (2.0 * h);
                }
            }
        }
        let mut by_inputs = Array2::zeros((n, n));
        for j in 0..n {
            let mut shifted = angles.to_vec();
            shifted[j] += h;
            let plus = quantum_forward(c, p, &shifted).unwrap();
            shifted[j] -= 2.0 * h;
            let minus = quantum_forward(c, p, &shifted).unwrap();
            for k in 0..n {
                by_inputs[(j, k)] = (plus[k] - minus[k]) / (2.0 * h);
            }
        }
        (by_params, by_inputs)
    }

    #[test]
    fn parameter_shift_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        for _ in 0..20 {
            let n = rng.gen_range(1..=4);
            let depth = rng.gen_range(0..=3);
            let c = cfg(n, depth);
            let p = CircuitParams::new(
                &c,
                Array2::from_shape_fn((depth, n), |_| rng.gen_range(-PI..PI)),
            )
            .unwrap();
            let angles: Vec<f64> = (0..n).map(|_| rng.gen_range(-PI..PI)).collect();

            let jac = param_shift_grad(&c, &p, &angles).unwrap();
            let (fd_params, fd_inputs) = finite_diff_jacobian(&c, &p, &angles, 1e-5);

            for (a, b) in jac.by_params.iter().zip(fd_params.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-5);
            }
            for (a, b) in jac.by_inputs.iter().zip(fd_inputs.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-5);
            }
        }
    }

    #[test]
    fn depth_zero_has_empty_param_gradient() {
        let c = cfg(3, 0);
        let p = CircuitParams::zeros(&c);
        let jac = param_shift_grad(&c, &p, &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(jac.by_params.len(), 0);
        assert_eq!(jac.by_inputs.dim(), (3, 3));
    }

    #[test]
    fn forward_rejects_shape_mismatch() {
        let c = cfg(2, 1);
        let p = CircuitParams::zeros(&c);
        assert!(matches!(quantum_forward(&c, &p, &[0.0]), Err(Error::Shape(_))));

        let other = cfg(2, 2);
        let wrong = CircuitParams::zeros(&other);
        assert!(matches!(
            quantum_forward(&c, &wrong, &[0.0, 0.0]),
            Err(Error::Shape(_))
        ));
    }
}

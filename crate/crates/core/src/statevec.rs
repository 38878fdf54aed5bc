//! Dense state-vector simulator for the {H, RY, CNOT} gate set.
//!
//! A register of `n` qubits is stored as 2^n complex amplitudes. Qubit `k`
//! corresponds to bit `k` of the basis-state index (little-endian), so for a
//! two-qubit register the amplitude at index 2 = 0b10 belongs to the basis
//! state with qubit 1 set and qubit 0 clear.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hard ceiling on register width; 2^24 amplitudes is the desk-scale limit.
pub const MAX_QUBITS: usize = 24;

/// Gate in the simulator's native set, applied via [`StateVector::apply`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateOp {
    Hadamard { target: usize },
    RotationY { target: usize, angle: f64 },
    ControlledNot { control: usize, target: usize },
}

/// Pure state of an `n_qubits` register as a dense amplitude vector.
///
/// All gate methods update the state in place; the borrow checker guarantees
/// a value is never mutated from two contexts at once. Gates are unitary, so
/// the squared norm stays 1 up to floating-point roundoff.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// All-|0⟩ register: amplitude 1 at index 0, 0 elsewhere.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(n_qubits));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    /// Build a state from raw amplitudes. The length must be a power of two
    /// covering 1..=MAX_QUBITS qubits and the vector must be normalized.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Argument(format!(
                "amplitude vector length {len} is not a power of two >= 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(n_qubits));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::Argument(format!(
                "amplitude vector is not normalized (|psi|^2 = {norm})"
            )));
        }
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Sum of squared amplitude magnitudes; 1 within 1e-10 for any state
    /// produced by the gate set.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, index: usize) -> Result<()> {
        if index >= self.n_qubits {
            return Err(Error::QubitIndex {
                index,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    /// Hadamard on `target`: maps each amplitude pair (a0, a1) across the
    /// target bit to ((a0+a1)/sqrt(2), (a0-a1)/sqrt(2)).
    pub fn apply_hadamard(&mut self, target: usize) -> Result<()> {
        self.check_qubit(target)?;
        let mask = 1usize << target;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let a0 = self.amps[i];
                let a1 = self.amps[j];
                self.amps[i] = (a0 + a1) * std::f64::consts::FRAC_1_SQRT_2;
                self.amps[j] = (a0 - a1) * std::f64::consts::FRAC_1_SQRT_2;
            }
        }
        Ok(())
    }

    /// Y-axis rotation by `theta` on `target`, the 2x2 block
    /// [[cos(t/2), -sin(t/2)], [sin(t/2), cos(t/2)]] applied across the
    /// target bit.
    pub fn apply_ry(&mut self, target: usize, theta: f64) -> Result<()> {
        self.check_qubit(target)?;
        if !theta.is_finite() {
            return Err(Error::NonFiniteAngle(theta));
        }
        let (sin, cos) = (theta / 2.0).sin_cos();
        let mask = 1usize << target;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let a0 = self.amps[i];
                let a1 = self.amps[j];
                self.amps[i] = a0 * cos - a1 * sin;
                self.amps[j] = a0 * sin + a1 * cos;
            }
        }
        Ok(())
    }

    /// CNOT: swaps amplitudes across the target bit wherever the control bit
    /// is set; basis states with control 0 are untouched.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::ControlEqualsTarget(control));
        }
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        for i in 0..self.amps.len() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amps.swap(i, i | tmask);
            }
        }
        Ok(())
    }

    /// Pauli-Z expectation on `wire`: sum of |a(i)|^2 signed +1 when the wire
    /// bit is 0 and -1 when it is 1. Clamped to [-1, 1] against roundoff.
    pub fn expect_z(&self, wire: usize) -> Result<f64> {
        self.check_qubit(wire)?;
        let mask = 1usize << wire;
        let val: f64 = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let p = a.norm_sqr();
                if i & mask == 0 {
                    p
                } else {
                    -p
                }
            })
            .sum();
        Ok(val.clamp(-1.0, 1.0))
    }

    pub fn apply(&mut self, op: GateOp) -> Result<()> {
        match op {
            GateOp::Hadamard { target } => self.apply_hadamard(target),
            GateOp::RotationY { target, angle } => self.apply_ry(target, angle),
            GateOp::ControlledNot { control, target } => self.apply_cnot(control, target),
        }
    }

    /// Apply a gate sequence in order; the first invalid op aborts with its
    /// error, leaving the state at the last successful gate.
    pub fn apply_circuit(&mut self, ops: &[GateOp]) -> Result<()> {
        for op in ops {
            self.apply(*op)?;
        }
        Ok(())
    }
}

//! Dense-matrix reference model for verification.
//!
//! Gates are materialized as full 2^n x 2^n unitaries via explicit Kronecker
//! products and applied by matrix-vector multiplication. Shares no code with
//! the bit-twiddling kernels in [`crate::statevec`]; tests cross-validate the
//! two routes against each other. Dense construction is exponential in every
//! way, so keep n small (the tests use n <= 4).

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::statevec::GateOp;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(dim: usize) -> Array2<Complex64> {
    Array2::from_shape_fn((dim, dim), |(i, j)| if i == j { c(1.0) } else { c(0.0) })
}

pub fn hadamard_matrix() -> Array2<Complex64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ndarray::arr2(&[[c(h), c(h)], [c(h), c(-h)]])
}

pub fn ry_matrix(theta: f64) -> Array2<Complex64> {
    let (s, co) = (theta / 2.0).sin_cos();
    ndarray::arr2(&[[c(co), c(-s)], [c(s), c(co)]])
}

pub fn pauli_x_matrix() -> Array2<Complex64> {
    ndarray::arr2(&[[c(0.0), c(1.0)], [c(1.0), c(0.0)]])
}

pub fn pauli_z_matrix() -> Array2<Complex64> {
    ndarray::arr2(&[[c(1.0), c(0.0)], [c(0.0), c(-1.0)]])
}

/// Kronecker product, row-major convention: (A ⊗ B)[(ia,ib),(ja,jb)] = A[ia,ja]·B[ib,jb].
pub fn kron(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::from_elem((ar * br, ac * bc), c(0.0));
    for ia in 0..ar {
        for ja in 0..ac {
            for ib in 0..br {
                for jb in 0..bc {
                    out[(ia * br + ib, ja * bc + jb)] = a[(ia, ja)] * b[(ib, jb)];
                }
            }
        }
    }
    out
}

/// Embed single-qubit matrices at the given qubit positions of an n-qubit
/// register, identity elsewhere. Qubit k is bit k of the basis index, so it
/// sits at position n-1-k in the left-to-right Kronecker chain.
pub fn embed(n_qubits: usize, placements: &[(usize, Array2<Complex64>)]) -> Array2<Complex64> {
    let mut full = identity(1);
    for k in (0..n_qubits).rev() {
        let factor = placements
            .iter()
            .find(|(q, _)| *q == k)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| identity(2));
        full = kron(&full, &factor);
    }
    full
}

/// Full unitary for one gate on an n-qubit register.
///
/// CNOT is built from projector algebra: P0(control) ⊗ I + P1(control) ⊗ X(target).
pub fn gate_unitary(n_qubits: usize, op: &GateOp) -> Array2<Complex64> {
    match *op {
        GateOp::Hadamard { target } => embed(n_qubits, &[(target, hadamard_matrix())]),
        GateOp::RotationY { target, angle } => embed(n_qubits, &[(target, ry_matrix(angle))]),
        GateOp::ControlledNot { control, target } => {
            let p0 = ndarray::arr2(&[[c(1.0), c(0.0)], [c(0.0), c(0.0)]]);
            let p1 = ndarray::arr2(&[[c(0.0), c(0.0)], [c(0.0), c(1.0)]]);
            let hold = embed(n_qubits, &[(control, p0)]);
            let flip = embed(n_qubits, &[(control, p1), (target, pauli_x_matrix())]);
            hold + flip
        }
    }
}

/// Product of the gate unitaries in application order (rightmost factor acts first).
pub fn circuit_unitary(n_qubits: usize, ops: &[GateOp]) -> Array2<Complex64> {
    let mut u = identity(1 << n_qubits);
    for op in ops {
        u = gate_unitary(n_qubits, op).dot(&u);
    }
    u
}

pub fn apply_unitary(u: &Array2<Complex64>, amps: &[Complex64]) -> Result<Vec<Complex64>> {
    let (rows, cols) = u.dim();
    if cols != amps.len() {
        return Err(Error::Shape(format!(
            "unitary is {rows}x{cols} but state has {} amplitudes",
            amps.len()
        )));
    }
    Ok((0..rows)
        .map(|i| (0..cols).map(|j| u[(i, j)] * amps[j]).sum())
        .collect())
}

/// ⟨psi| Z_wire |psi⟩ evaluated through the dense operator, not bit masks.
pub fn expect_z_dense(n_qubits: usize, wire: usize, amps: &[Complex64]) -> Result<f64> {
    let z = embed(n_qubits, &[(wire, pauli_z_matrix())]);
    let z_psi = apply_unitary(&z, amps)?;
    let val: Complex64 = amps
        .iter()
        .zip(z_psi.iter())
        .map(|(a, za)| a.conj() * za)
        .sum();
    Ok(val.re)
}

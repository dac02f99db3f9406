//! Library of standard target gates.

use super::defs::{lift_gate, ControlledBase, GateDef};
use super::matrix::ComplexMatrix;
use super::GateError;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Builds a permutation matrix from a basis map `b -> perm(b)`.
fn permutation(n_qubits: usize, perm: impl Fn(usize) -> usize) -> ComplexMatrix {
    let dim = 1usize << n_qubits;
    let mut m = ComplexMatrix::zeros(dim);
    for b in 0..dim {
        m.set(perm(b), b, 1.0, 0.0);
    }
    m
}

/// 1-based big-endian bit of qubit `q` in basis index `b`.
fn bit(b: usize, q: usize, n: usize) -> usize {
    (b >> (n - q)) & 1
}

fn flip(b: usize, q: usize, n: usize) -> usize {
    b ^ (1 << (n - q))
}

/// Looks up a standard target gate by name at register size `n`.
///
/// Names are case-insensitive and ignore `-`/`_`/space. `CNOT_c_t` (or the
/// compact `CNOT_ct`) is accepted for arbitrary qubit pairs.
pub fn target_lookup(name: &str, n: usize) -> Result<ComplexMatrix, GateError> {
    let canon: String = name
        .chars()
        .filter(|c| !matches!(c, '-' | '_' | ' '))
        .collect::<String>()
        .to_ascii_lowercase();

    let need = |want: usize| -> Result<(), GateError> {
        if n == want {
            Ok(())
        } else {
            Err(GateError::TargetSize {
                name: name.to_string(),
                need: want,
                got: n,
            })
        }
    };

    match canon.as_str() {
        "reversecnot" | "cnotrev" | "cnot21rev" | "rcnot" => {
            need(2)?;
            return Ok(permutation(2, |b| {
                if bit(b, 2, 2) == 1 {
                    flip(b, 1, 2)
                } else {
                    b
                }
            }));
        }
        "magic" | "m" => {
            need(2)?;
            let s = FRAC_1_SQRT_2;
            return Ok(ComplexMatrix::from_rows(&[
                vec![(s, 0.0), (0.0, s), (0.0, 0.0), (0.0, 0.0)],
                vec![(0.0, 0.0), (0.0, 0.0), (0.0, s), (s, 0.0)],
                vec![(0.0, 0.0), (0.0, 0.0), (0.0, s), (-s, 0.0)],
                vec![(s, 0.0), (0.0, -s), (0.0, 0.0), (0.0, 0.0)],
            ]));
        }
        "toffoli" | "ccx" | "ccnot" => {
            need(3)?;
            return Ok(permutation(3, |b| {
                if bit(b, 1, 3) == 1 && bit(b, 2, 3) == 1 {
                    flip(b, 3, 3)
                } else {
                    b
                }
            }));
        }
        "fredkin" | "cswap" => {
            need(3)?;
            return Ok(permutation(3, |b| {
                if bit(b, 1, 3) == 1 {
                    let (b2, b3) = (bit(b, 2, 3), bit(b, 3, 3));
                    (b & 0b100) | (b3 << 1) | b2
                } else {
                    b
                }
            }));
        }
        "margolus" => {
            need(3)?;
            // Toffoli up to a sign flip on |101>: the relative-phase variant
            // reachable with four Ry(±π/8) rotations and three CNOTs.
            let mut m = permutation(3, |b| match b {
                0b110 => 0b111,
                0b111 => 0b110,
                other => other,
            });
            m.set(0b101, 0b101, -1.0, 0.0);
            return Ok(m);
        }
        "controlledv" | "cv" => {
            need(2)?;
            return lift_gate(&GateDef::controlled(ControlledBase::V, 1, 2), 2);
        }
        "controlledz" | "cz" => {
            need(2)?;
            return lift_gate(&GateDef::controlled(ControlledBase::Z, 1, 2), 2);
        }
        "controlledh" | "ch" => {
            need(2)?;
            return lift_gate(&GateDef::controlled(ControlledBase::H, 1, 2), 2);
        }
        "qft" | "qft2" => {
            need(2)?;
            // 4x4 discrete Fourier transform, ω = i.
            let mut m = ComplexMatrix::zeros(4);
            for j in 0..4 {
                for k in 0..4 {
                    let phase = std::f64::consts::FRAC_PI_2 * ((j * k) as f64);
                    m.set(j, k, 0.5 * phase.cos(), 0.5 * phase.sin());
                }
            }
            return Ok(m);
        }
        "iswap" => {
            need(2)?;
            let mut m = ComplexMatrix::zeros(4);
            m.set(0, 0, 1.0, 0.0);
            m.set(1, 2, 0.0, 1.0);
            m.set(2, 1, 0.0, 1.0);
            m.set(3, 3, 1.0, 0.0);
            return Ok(m);
        }
        "groverdiffusion" | "grover" => {
            need(2)?;
            let mut m = ComplexMatrix::zeros(4);
            for i in 0..4 {
                for j in 0..4 {
                    m.set(i, j, if i == j { -0.5 } else { 0.5 }, 0.0);
                }
            }
            return Ok(m);
        }
        "hadamard" | "h1" => {
            // H on qubit 1, identity elsewhere.
            return lift_gate(&GateDef::single(super::defs::SingleGate::H, 1), n);
        }
        "s" | "sgate" | "phase" => {
            return lift_gate(&GateDef::single(super::defs::SingleGate::S, 1), n);
        }
        "w" => {
            need(2)?;
            let s = FRAC_1_SQRT_2;
            return Ok(ComplexMatrix::from_rows(&[
                vec![(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)],
                vec![(0.0, 0.0), (s, 0.0), (s, 0.0), (0.0, 0.0)],
                vec![(0.0, 0.0), (s, 0.0), (-s, 0.0), (0.0, 0.0)],
                vec![(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)],
            ]));
        }
        "identity" | "id" => {
            return Ok(ComplexMatrix::identity(1 << n));
        }
        _ => {}
    }

    // Generic CNOT between arbitrary qubits: cnot_c_t or compact cnotct.
    if let Some(rest) = canon.strip_prefix("cnot") {
        let digits: Vec<usize> = rest
            .chars()
            .filter_map(|c| c.to_digit(10).map(|d| d as usize))
            .collect();
        if digits.len() == 2 && rest.chars().all(|c| c.is_ascii_digit()) {
            let (c, t) = (digits[0], digits[1]);
            if c >= 1 && t >= 1 && c <= n && t <= n && c != t {
                return Ok(permutation(n, |b| {
                    if bit(b, c, n) == 1 {
                        flip(b, t, n)
                    } else {
                        b
                    }
                }));
            }
        }
    }

    Err(GateError::UnknownTarget(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cnot_13_truth_table() {
        let m = target_lookup("CNOT_13", 3).unwrap();
        for b in 0..8usize {
            let want = if b & 0b100 != 0 { b ^ 1 } else { b };
            let (re, im) = m.get(want, b);
            assert_eq!((re, im), (1.0, 0.0), "column {b}");
        }
        assert!(m.is_unitary(1e-12));
    }

    #[test]
    fn iswap_entries() {
        let m = target_lookup("iSwap", 2).unwrap();
        assert_eq!(m.get(1, 2), (0.0, 1.0));
        assert_eq!(m.get(2, 1), (0.0, 1.0));
        assert_eq!(m.get(0, 0), (1.0, 0.0));
        assert!(m.is_unitary(1e-10));
    }

    #[test]
    fn toffoli_truth_table() {
        let m = target_lookup("Toffoli", 3).unwrap();
        for b in 0..8usize {
            let want = if b & 0b110 == 0b110 { b ^ 1 } else { b };
            assert_eq!(m.get(want, b), (1.0, 0.0));
        }
    }

    #[test]
    fn fredkin_swaps_targets_under_control() {
        let m = target_lookup("Fredkin", 3).unwrap();
        assert_eq!(m.get(0b101, 0b110), (1.0, 0.0));
        assert_eq!(m.get(0b110, 0b101), (1.0, 0.0));
        assert_eq!(m.get(0b011, 0b011), (1.0, 0.0));
        assert!(m.is_unitary(1e-12));
    }

    #[test]
    fn all_named_targets_are_unitary() {
        for (name, n) in [
            ("reverse_cnot", 2),
            ("magic", 2),
            ("toffoli", 3),
            ("controlled_v", 2),
            ("qft", 2),
            ("iswap", 2),
            ("grover_diffusion", 2),
            ("cnot_41", 4),
            ("fredkin", 3),
            ("hadamard", 2),
            ("s", 2),
            ("controlled_z", 2),
            ("magic", 2),
            ("controlled_h", 2),
            ("w", 2),
            ("margolus", 3),
        ] {
            let m = target_lookup(name, n).unwrap();
            assert!(m.is_unitary(1e-10), "{name} not unitary");
        }
    }

    #[test]
    fn unknown_target_errors() {
        assert!(matches!(
            target_lookup("no_such_gate", 2),
            Err(GateError::UnknownTarget(_))
        ));
        assert!(target_lookup("toffoli", 2).is_err());
    }
}

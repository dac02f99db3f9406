//! Gate definitions, the parametrized one-qubit gate family, and lifting
//! onto an N-qubit register.
//!
//! Qubit indices are 1-based and big-endian: qubit 1 is the most significant
//! bit of a basis index, so a gate on qubit 1 lifts as `U ⊗ I ⊗ ...`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::matrix::{kron_all, ComplexMatrix};
use super::GateError;

/// Named constant one-qubit gates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingleGate {
    H,
    X,
    Y,
    Z,
    S,
    Sdagger,
    T,
    Tdagger,
}

impl SingleGate {
    pub fn name(self) -> &'static str {
        match self {
            SingleGate::H => "H",
            SingleGate::X => "X",
            SingleGate::Y => "Y",
            SingleGate::Z => "Z",
            SingleGate::S => "S",
            SingleGate::Sdagger => "Sdagger",
            SingleGate::T => "T",
            SingleGate::Tdagger => "Tdagger",
        }
    }

    pub fn matrix(self) -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            SingleGate::H => ComplexMatrix::from_rows(&[
                vec![(s, 0.0), (s, 0.0)],
                vec![(s, 0.0), (-s, 0.0)],
            ]),
            SingleGate::X => ComplexMatrix::from_rows(&[
                vec![(0.0, 0.0), (1.0, 0.0)],
                vec![(1.0, 0.0), (0.0, 0.0)],
            ]),
            SingleGate::Y => ComplexMatrix::from_rows(&[
                vec![(0.0, 0.0), (0.0, -1.0)],
                vec![(0.0, 1.0), (0.0, 0.0)],
            ]),
            SingleGate::Z => ComplexMatrix::from_rows(&[
                vec![(1.0, 0.0), (0.0, 0.0)],
                vec![(0.0, 0.0), (-1.0, 0.0)],
            ]),
            SingleGate::S => ComplexMatrix::from_rows(&[
                vec![(1.0, 0.0), (0.0, 0.0)],
                vec![(0.0, 0.0), (0.0, 1.0)],
            ]),
            SingleGate::Sdagger => ComplexMatrix::from_rows(&[
                vec![(1.0, 0.0), (0.0, 0.0)],
                vec![(0.0, 0.0), (0.0, -1.0)],
            ]),
            SingleGate::T => ComplexMatrix::from_rows(&[
                vec![(1.0, 0.0), (0.0, 0.0)],
                vec![(0.0, 0.0), (s, s)],
            ]),
            SingleGate::Tdagger => ComplexMatrix::from_rows(&[
                vec![(1.0, 0.0), (0.0, 0.0)],
                vec![(0.0, 0.0), (s, -s)],
            ]),
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        match name {
            "H" => Some(SingleGate::H),
            "X" => Some(SingleGate::X),
            "Y" => Some(SingleGate::Y),
            "Z" => Some(SingleGate::Z),
            "S" => Some(SingleGate::S),
            "Sdagger" | "Sdag" => Some(SingleGate::Sdagger),
            "T" => Some(SingleGate::T),
            "Tdagger" | "Tdag" => Some(SingleGate::Tdagger),
            _ => None,
        }
    }
}

/// Parametrized one-qubit gate families, all expressed through the
/// three-angle universal gate:
///
/// `U3(θ, φ, λ) = [[cos θ, −e^{iλ} sin θ], [e^{iφ} sin θ, e^{i(φ+λ)} cos θ]]`
///
/// Angles are full angles (cos θ, not cos θ/2). `Ry(θ) = U3(θ, 0, 0)`,
/// `Rz(λ) = U3(0, 0, λ)` and `Rx(θ) = U3(θ, −π/2, π/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamGate {
    U3,
    Rx,
    Ry,
    Rz,
}

impl ParamGate {
    pub fn name(self) -> &'static str {
        match self {
            ParamGate::U3 => "U3",
            ParamGate::Rx => "RX",
            ParamGate::Ry => "RY",
            ParamGate::Rz => "RZ",
        }
    }

    pub fn n_angles(self) -> usize {
        match self {
            ParamGate::U3 => 3,
            _ => 1,
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        match name {
            "U3" => Some(ParamGate::U3),
            "RX" | "Rx" => Some(ParamGate::Rx),
            "RY" | "Ry" => Some(ParamGate::Ry),
            "RZ" | "Rz" => Some(ParamGate::Rz),
            _ => None,
        }
    }

    /// Concrete matrix at the given angles under the chosen convention.
    pub fn matrix(self, angles: &[f64], convention: AngleConvention) -> ComplexMatrix {
        let halve = matches!(convention, AngleConvention::Half);
        let theta = |t: f64| if halve { t / 2.0 } else { t };
        match self {
            ParamGate::U3 => u3_matrix(theta(angles[0]), angles[1], angles[2]),
            ParamGate::Ry => u3_matrix(theta(angles[0]), 0.0, 0.0),
            ParamGate::Rz => u3_matrix(0.0, 0.0, angles[0]),
            ParamGate::Rx => u3_matrix(theta(angles[0]), -PI / 2.0, PI / 2.0),
        }
    }
}

/// Whether θ enters the U3 matrix as printed (`Full`, the default) or as
/// θ/2 for compatibility with the common half-angle convention. No silent
/// conversion is ever applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleConvention {
    #[default]
    Full,
    Half,
}

/// The universal one-qubit gate at full angles:
/// entries `cos θ`, `−e^{iλ} sin θ`, `e^{iφ} sin θ`, `e^{i(φ+λ)} cos θ`.
pub fn u3_matrix(theta: f64, phi: f64, lam: f64) -> ComplexMatrix {
    let (st, ct) = theta.sin_cos();
    ComplexMatrix::from_rows(&[
        vec![(ct, 0.0), (-lam.cos() * st, -lam.sin() * st)],
        vec![
            (phi.cos() * st, phi.sin() * st),
            ((phi + lam).cos() * ct, (phi + lam).sin() * ct),
        ],
    ])
}

/// Base gate of a controlled two-qubit gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ControlledBase {
    X,
    Z,
    H,
    V,
    Vdagger,
    S,
    Sdagger,
}

impl ControlledBase {
    pub fn name(self) -> &'static str {
        match self {
            ControlledBase::X => "CNOT",
            ControlledBase::Z => "CZ",
            ControlledBase::H => "CH",
            ControlledBase::V => "CV",
            ControlledBase::Vdagger => "CVdagger",
            ControlledBase::S => "CS",
            ControlledBase::Sdagger => "CSdagger",
        }
    }

    pub fn base_matrix(self) -> ComplexMatrix {
        match self {
            ControlledBase::X => SingleGate::X.matrix(),
            ControlledBase::Z => SingleGate::Z.matrix(),
            ControlledBase::H => SingleGate::H.matrix(),
            ControlledBase::S => SingleGate::S.matrix(),
            ControlledBase::Sdagger => SingleGate::Sdagger.matrix(),
            ControlledBase::V => ComplexMatrix::from_rows(&[
                vec![(0.5, 0.5), (0.5, -0.5)],
                vec![(0.5, -0.5), (0.5, 0.5)],
            ]),
            ControlledBase::Vdagger => ComplexMatrix::from_rows(&[
                vec![(0.5, -0.5), (0.5, 0.5)],
                vec![(0.5, 0.5), (0.5, -0.5)],
            ]),
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        match name {
            "CNOT" | "CX" => Some(ControlledBase::X),
            "CZ" => Some(ControlledBase::Z),
            "CH" => Some(ControlledBase::H),
            "CV" => Some(ControlledBase::V),
            "CVdagger" | "CVdag" => Some(ControlledBase::Vdagger),
            "CS" => Some(ControlledBase::S),
            "CSdagger" | "CSdag" => Some(ControlledBase::Sdagger),
            _ => None,
        }
    }
}

/// One slot of a gate column: a constant or parametrized one-qubit gate on
/// a specific qubit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub gate: AtomGate,
    pub qubit: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum AtomGate {
    Const(SingleGate),
    Param {
        gate: ParamGate,
        /// Concrete angles once expanded; `None` until a discretization is
        /// applied.
        angles: Option<Vec<f64>>,
        #[serde(default)]
        convention: AngleConvention,
    },
}

impl Atom {
    fn matrix(&self) -> Result<ComplexMatrix, GateError> {
        match &self.gate {
            AtomGate::Const(g) => Ok(g.matrix()),
            AtomGate::Param {
                gate,
                angles: Some(a),
                convention,
            } => Ok(gate.matrix(a, *convention)),
            AtomGate::Param { gate, angles: None, .. } => Err(GateError::UnresolvedAngles(
                format!("{}_{}", gate.name(), self.qubit),
            )),
        }
    }

    fn label(&self) -> String {
        match &self.gate {
            AtomGate::Const(g) => format!("{}_{}", g.name(), self.qubit),
            AtomGate::Param { gate, angles, .. } => match angles {
                None => format!("{}_{}", gate.name(), self.qubit),
                Some(a) => {
                    let parts: Vec<String> = a.iter().map(|v| fmt_angle(*v)).collect();
                    format!("{}_{}({})", gate.name(), self.qubit, parts.join(","))
                }
            },
        }
    }
}

/// Formats an angle as a multiple of π when it is one, falling back to
/// plain radians.
pub fn fmt_angle(v: f64) -> String {
    let frac = v / PI;
    let rounded = (frac * 16.0).round() / 16.0;
    if (frac - rounded).abs() < 1e-9 {
        if rounded == 0.0 {
            return "0".to_string();
        }
        return format!("{rounded}pi");
    }
    format!("{v:.6}")
}

/// A native input gate: the identity, one column of one-qubit gates on
/// distinct qubits, or a controlled two-qubit gate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    Identity,
    Column(Vec<Atom>),
    Controlled {
        base: ControlledBase,
        control: usize,
        target: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateDef {
    pub name: String,
    pub kind: GateKind,
}

impl fmt::Display for GateDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl GateDef {
    pub fn identity() -> Self {
        GateDef {
            name: "Identity".to_string(),
            kind: GateKind::Identity,
        }
    }

    pub fn single(gate: SingleGate, qubit: usize) -> Self {
        Self::column(vec![Atom {
            gate: AtomGate::Const(gate),
            qubit,
        }])
    }

    pub fn controlled(base: ControlledBase, control: usize, target: usize) -> Self {
        GateDef {
            name: format!("{}_{}_{}", base.name(), control, target),
            kind: GateKind::Controlled {
                base,
                control,
                target,
            },
        }
    }

    pub fn column(atoms: Vec<Atom>) -> Self {
        let name = atoms
            .iter()
            .map(Atom::label)
            .collect::<Vec<_>>()
            .join("x");
        GateDef {
            name,
            kind: GateKind::Column(atoms),
        }
    }

    /// A parametrized gate awaiting angle discretization.
    pub fn parametrized(gate: ParamGate, qubit: usize) -> Self {
        Self::column(vec![Atom {
            gate: AtomGate::Param {
                gate,
                angles: None,
                convention: AngleConvention::Full,
            },
            qubit,
        }])
    }

    /// True when some atom still has unresolved angles.
    pub fn is_parametrized(&self) -> bool {
        match &self.kind {
            GateKind::Column(atoms) => atoms
                .iter()
                .any(|a| matches!(a.gate, AtomGate::Param { angles: None, .. })),
            _ => false,
        }
    }

    /// Refreshes the display name from the kind (used after resolving
    /// angles).
    pub fn with_canonical_name(mut self) -> Self {
        if let GateKind::Column(atoms) = &self.kind {
            self.name = atoms
                .iter()
                .map(Atom::label)
                .collect::<Vec<_>>()
                .join("x");
        }
        self
    }

    fn validate_placement(&self, n: usize) -> Result<(), GateError> {
        let check = |q: usize| {
            if q == 0 || q > n {
                Err(GateError::Placement { qubit: q, n })
            } else {
                Ok(())
            }
        };
        match &self.kind {
            GateKind::Identity => Ok(()),
            GateKind::Column(atoms) => {
                let mut seen = vec![false; n + 1];
                for a in atoms {
                    check(a.qubit)?;
                    if seen[a.qubit] {
                        return Err(GateError::DuplicatePlacement(a.qubit));
                    }
                    seen[a.qubit] = true;
                }
                Ok(())
            }
            GateKind::Controlled {
                control, target, ..
            } => {
                check(*control)?;
                check(*target)?;
                if control == target {
                    return Err(GateError::DuplicatePlacement(*control));
                }
                Ok(())
            }
        }
    }
}

/// Lifts a one-qubit matrix to qubit `q` of an `n`-qubit register:
/// `I^⊗(q−1) ⊗ U ⊗ I^⊗(n−q)`.
pub fn lift_single(u: &ComplexMatrix, q: usize, n: usize) -> ComplexMatrix {
    let i2 = ComplexMatrix::identity(2);
    let factors: Vec<ComplexMatrix> = (1..=n)
        .map(|pos| if pos == q { u.clone() } else { i2.clone() })
        .collect();
    kron_all(&factors)
}

/// Lifts a gate definition to its full `2^n x 2^n` matrix.
///
/// Controlled gates use the projector decomposition
/// `P0@control ⊗ I + P1@control ⊗ U@target`, which handles reversed and
/// non-adjacent control/target placements exactly.
pub fn lift_gate(def: &GateDef, n: usize) -> Result<ComplexMatrix, GateError> {
    def.validate_placement(n)?;
    let dim = 1usize << n;
    match &def.kind {
        GateKind::Identity => Ok(ComplexMatrix::identity(dim)),
        GateKind::Column(atoms) => {
            let i2 = ComplexMatrix::identity(2);
            let mut factors: Vec<ComplexMatrix> = vec![i2; n];
            for a in atoms {
                factors[a.qubit - 1] = a.matrix()?;
            }
            Ok(kron_all(&factors))
        }
        GateKind::Controlled {
            base,
            control,
            target,
        } => {
            let p0 = ComplexMatrix::from_rows(&[
                vec![(1.0, 0.0), (0.0, 0.0)],
                vec![(0.0, 0.0), (0.0, 0.0)],
            ]);
            let p1 = ComplexMatrix::from_rows(&[
                vec![(0.0, 0.0), (0.0, 0.0)],
                vec![(0.0, 0.0), (1.0, 0.0)],
            ]);
            let i2 = ComplexMatrix::identity(2);
            let mut f0: Vec<ComplexMatrix> = vec![i2.clone(); n];
            f0[control - 1] = p0;
            let mut f1: Vec<ComplexMatrix> = vec![i2; n];
            f1[control - 1] = p1;
            f1[target - 1] = base.base_matrix();
            Ok(kron_all(&f0).add(&kron_all(&f1)))
        }
    }
}

/// Parses a gate string such as `H_1`, `CNOT_1_2`, `U3_2`, `H_1xH_2`,
/// or `RY_3(0.125pi)`.
///
/// Columns join one-qubit atoms with `x`; angle lists accept radians or
/// `<frac>pi` forms.
pub fn parse_gate(s: &str) -> Result<GateDef, GateError> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("identity") || s.eq_ignore_ascii_case("id") {
        return Ok(GateDef::identity());
    }
    let err = |msg: &str| GateError::Parse(s.to_string(), msg.to_string());

    let atoms_src: Vec<&str> = s.split('x').collect();
    if atoms_src.len() == 1 {
        // Try a controlled gate first: NAME_c_t.
        let (head, _angles) = split_angles(s).map_err(|m| err(&m))?;
        let parts: Vec<&str> = head.split('_').collect();
        if parts.len() == 3 {
            if let Some(base) = ControlledBase::from_name(parts[0]) {
                let control: usize = parts[1].parse().map_err(|_| err("bad control index"))?;
                let target: usize = parts[2].parse().map_err(|_| err("bad target index"))?;
                return Ok(GateDef::controlled(base, control, target));
            }
        }
    }

    let mut atoms = Vec::with_capacity(atoms_src.len());
    for atom_src in atoms_src {
        let (head, angles) = split_angles(atom_src).map_err(|m| err(&m))?;
        let parts: Vec<&str> = head.split('_').collect();
        if parts.len() != 2 {
            return Err(err("expected NAME_qubit"));
        }
        let qubit: usize = parts[1].parse().map_err(|_| err("bad qubit index"))?;
        if let Some(g) = SingleGate::from_name(parts[0]) {
            if angles.is_some() {
                return Err(err("constant gate does not take angles"));
            }
            atoms.push(Atom {
                gate: AtomGate::Const(g),
                qubit,
            });
        } else if let Some(g) = ParamGate::from_name(parts[0]) {
            if let Some(a) = &angles {
                if a.len() != g.n_angles() {
                    return Err(err("wrong number of angles"));
                }
            }
            atoms.push(Atom {
                gate: AtomGate::Param {
                    gate: g,
                    angles,
                    convention: AngleConvention::Full,
                },
                qubit,
            });
        } else {
            return Err(err("unknown gate name"));
        }
    }
    Ok(GateDef::column(atoms))
}

/// Splits `NAME_q(a,b,c)` into the head and parsed angle list.
fn split_angles(s: &str) -> Result<(&str, Option<Vec<f64>>), String> {
    match s.find('(') {
        None => Ok((s, None)),
        Some(pos) => {
            let head = &s[..pos];
            let rest = s[pos + 1..]
                .strip_suffix(')')
                .ok_or_else(|| "missing closing parenthesis".to_string())?;
            let mut angles = Vec::new();
            for tok in rest.split(',') {
                angles.push(parse_angle(tok.trim())?);
            }
            Ok((head, Some(angles)))
        }
    }
}

/// Parses `0.5`, `pi`, `-pi/4`, `0.25pi` style angle tokens.
pub fn parse_angle(tok: &str) -> Result<f64, String> {
    let t = tok.trim();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let lower = t.to_ascii_lowercase();
    if let Some(head) = lower.strip_suffix("pi") {
        let head = head.trim();
        let factor = if head.is_empty() || head == "+" {
            1.0
        } else if head == "-" {
            -1.0
        } else {
            head.parse::<f64>()
                .map_err(|_| format!("bad angle token `{tok}`"))?
        };
        return Ok(factor * PI);
    }
    if let Some((num, den)) = lower.split_once('/') {
        let n = parse_angle(num)?;
        let d: f64 = den
            .trim()
            .parse()
            .map_err(|_| format!("bad angle token `{tok}`"))?;
        return Ok(n / d);
    }
    Err(format!("bad angle token `{tok}`"))
}

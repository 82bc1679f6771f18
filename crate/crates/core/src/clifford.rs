//! Layered Clifford circuits acting on phase-free Pauli frames.

use std::fmt;
use std::ops::Range;

use crate::code::StabilizerCode;
use crate::error::{invalid, Error, Result};
use crate::pauli::PauliString;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    S(usize),
    Cnot { control: usize, target: usize },
    Cz(usize, usize),
}

impl Gate {
    pub fn cnot(control: usize, target: usize) -> Gate {
        Gate::Cnot { control, target }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::S(q) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Cz(a, b) => vec![a, b],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cnot { .. } | Gate::Cz(..))
    }

    /// `P -> G P G^dagger`, phases dropped.
    #[inline]
    pub fn conjugate(&self, p: &mut PauliString) {
        match *self {
            Gate::H(q) => {
                let (x, z) = (p.x_bit(q), p.z_bit(q));
                p.set_x_bit(q, z);
                p.set_z_bit(q, x);
            }
            Gate::S(q) => {
                if p.x_bit(q) {
                    p.flip_z_bit(q);
                }
            }
            Gate::Cnot { control, target } => {
                if p.x_bit(control) {
                    p.flip_x_bit(target);
                }
                if p.z_bit(target) {
                    p.flip_z_bit(control);
                }
            }
            Gate::Cz(a, b) => {
                let (xa, xb) = (p.x_bit(a), p.x_bit(b));
                if xa {
                    p.flip_z_bit(b);
                }
                if xb {
                    p.flip_z_bit(a);
                }
            }
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::H(q) => write!(f, "H {q}"),
            Gate::S(q) => write!(f, "S {q}"),
            Gate::Cnot { control, target } => write!(f, "CNOT {control} {target}"),
            Gate::Cz(a, b) => write!(f, "CZ {a} {b}"),
        }
    }
}

/// Gates acting on pairwise disjoint qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateLayer {
    gates: Vec<Gate>,
}

impl GateLayer {
    pub fn new(gates: Vec<Gate>, width: usize) -> Result<Self> {
        let mut used = vec![false; width];
        for g in &gates {
            let qs = g.qubits();
            if qs.len() == 2 && qs[0] == qs[1] {
                return Err(invalid(format!("gate {g} acts twice on one qubit")));
            }
            for q in qs {
                if q >= width {
                    return Err(Error::OutOfRange(format!("gate {g} on {width} qubits")));
                }
                if used[q] {
                    return Err(invalid(format!("qubit {q} used twice in one layer")));
                }
                used[q] = true;
            }
        }
        Ok(GateLayer { gates })
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    #[inline]
    pub fn conjugate(&self, p: &mut PauliString) {
        for g in &self.gates {
            g.conjugate(p);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayeredCircuit {
    width: usize,
    layers: Vec<GateLayer>,
    /// `boundaries[b]..boundaries[b + 1]` are the layers of block `b`.
    boundaries: Vec<usize>,
}

impl LayeredCircuit {
    pub fn new(width: usize, layers: Vec<GateLayer>, boundaries: Vec<usize>) -> Result<Self> {
        if boundaries.len() < 2 || boundaries[0] != 0 || *boundaries.last().unwrap() != layers.len() {
            return Err(invalid("block boundaries must start at 0 and end at the layer count"));
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("blocks must be non-empty and ordered"));
        }
        for layer in &layers {
            GateLayer::new(layer.gates.clone(), width)?;
        }
        Ok(LayeredCircuit {
            width,
            layers,
            boundaries,
        })
    }

    /// Same circuit as a single block.
    pub fn single_block(width: usize, layers: Vec<GateLayer>) -> Result<Self> {
        let len = layers.len();
        Self::new(width, layers, vec![0, len])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn layers(&self) -> &[GateLayer] {
        &self.layers
    }

    pub fn num_blocks(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn block_range(&self, block: usize) -> Result<Range<usize>> {
        if block >= self.num_blocks() {
            return Err(Error::OutOfRange(format!(
                "block {block} of {}",
                self.num_blocks()
            )));
        }
        Ok(self.boundaries[block]..self.boundaries[block + 1])
    }

    /// Conjugates `p` through layers `from..to`.
    pub fn conjugate_forward(&self, p: &PauliString, from: usize, to: usize) -> Result<PauliString> {
        if p.n_qubits() != self.width {
            return Err(Error::DimensionMismatch {
                expected: self.width,
                found: p.n_qubits(),
            });
        }
        if from > to || to > self.layers.len() {
            return Err(Error::OutOfRange(format!(
                "layer range {from}..{to} of {}",
                self.layers.len()
            )));
        }
        let mut out = p.clone();
        self.conjugate_range(&mut out, from..to);
        Ok(out)
    }

    #[inline]
    pub fn conjugate_range(&self, p: &mut PauliString, range: Range<usize>) {
        for layer in &self.layers[range] {
            layer.conjugate(p);
        }
    }

    /// Line-oriented text form: `width N`, one `layer` line per layer with
    /// `;`-separated gates, then `blocks b0 b1 ...`.
    pub fn to_text(&self) -> String {
        let mut s = format!("width {}\n", self.width);
        for layer in &self.layers {
            let gates: Vec<String> = layer.gates.iter().map(|g| g.to_string()).collect();
            s.push_str("layer ");
            s.push_str(&gates.join("; "));
            s.push('\n');
        }
        let b: Vec<String> = self.boundaries.iter().map(|b| b.to_string()).collect();
        s.push_str(&format!("blocks {}\n", b.join(" ")));
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut width = None;
        let mut layers_raw: Vec<Vec<Gate>> = Vec::new();
        let mut boundaries = None;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, rest) = line.split_once(' ').unwrap_or((line, ""));
            let perr = |m: String| Error::Parse(format!("line {}: {m}", ln + 1));
            match head {
                "width" => {
                    width = Some(rest.trim().parse::<usize>().map_err(|e| perr(e.to_string()))?);
                }
                "layer" => {
                    let mut gates = Vec::new();
                    for g in rest.split(';').map(str::trim).filter(|g| !g.is_empty()) {
                        gates.push(parse_gate(g).map_err(|m| perr(m))?);
                    }
                    layers_raw.push(gates);
                }
                "blocks" => {
                    let b: std::result::Result<Vec<usize>, _> =
                        rest.split_whitespace().map(str::parse::<usize>).collect();
                    boundaries = Some(b.map_err(|e| perr(e.to_string()))?);
                }
                other => return Err(perr(format!("unknown directive {other:?}"))),
            }
        }
        let width = width.ok_or_else(|| Error::Parse("missing width".into()))?;
        let layers = layers_raw
            .into_iter()
            .map(|g| GateLayer::new(g, width))
            .collect::<Result<Vec<_>>>()?;
        let boundaries = boundaries.unwrap_or_else(|| vec![0, layers.len()]);
        Self::new(width, layers, boundaries)
    }
}

fn parse_gate(s: &str) -> std::result::Result<Gate, String> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    let q = |i: usize| -> std::result::Result<usize, String> {
        parts
            .get(i)
            .ok_or_else(|| format!("gate {s:?} is missing operands"))?
            .parse::<usize>()
            .map_err(|e| format!("gate {s:?}: {e}"))
    };
    let g = match parts.first().copied() {
        Some("H") => Gate::H(q(1)?),
        Some("S") => Gate::S(q(1)?),
        Some("CNOT") => Gate::cnot(q(1)?, q(2)?),
        Some("CZ") => Gate::Cz(q(1)?, q(2)?),
        _ => return Err(format!("unknown gate {s:?}")),
    };
    Ok(g)
}

/// Two-layer transversal logical CNOT between Iceberg logical qubits
/// `i -> j` (both in `1..=n-2`).
pub fn compile_logical_cnot(i: usize, j: usize, n: usize) -> Result<[GateLayer; 2]> {
    if n < 4 || i == j || i == 0 || j == 0 || i > n - 2 || j > n - 2 {
        return Err(invalid(format!("logical CNOT({i}, {j}) on n = {n}")));
    }
    let l1 = GateLayer::new(vec![Gate::cnot(0, 1), Gate::cnot(i + 1, j + 1)], n)?;
    let l2 = GateLayer::new(vec![Gate::cnot(0, j + 1), Gate::cnot(i + 1, 1)], n)?;
    Ok([l1, l2])
}

/// Iceberg-encoded GHZ preparation split into blocks of `T` logical gates.
#[derive(Clone, Debug)]
pub struct GhzBenchmark {
    pub n: usize,
    pub t: usize,
    pub circuit: LayeredCircuit,
    pub code: StabilizerCode,
    pub initial_generators: Vec<PauliString>,
    pub final_generators: Vec<PauliString>,
}

impl GhzBenchmark {
    pub fn logical_gates(&self) -> usize {
        self.n - 3
    }
}

/// Chain of logical CNOTs `j -> j+1` for `j = 1..=n-3`, starting from the
/// logical product state stabilized by `X_1, Z_2, ..., Z_{n-2}`. The final
/// generators are the initial ones conjugated through the circuit.
pub fn build_ghz_logical_circuit(n: usize, t: usize) -> Result<GhzBenchmark> {
    let code = StabilizerCode::iceberg(n)?;
    if t == 0 {
        return Err(invalid("T must be at least 1"));
    }
    let gates = n - 3;
    let mut layers = Vec::with_capacity(2 * gates);
    for j in 1..=gates {
        let [a, b] = compile_logical_cnot(j, j + 1, n)?;
        layers.push(a);
        layers.push(b);
    }
    let mut boundaries = vec![0];
    let mut g = 0;
    while g < gates {
        g = (g + t).min(gates);
        boundaries.push(2 * g);
    }
    let circuit = LayeredCircuit::new(n, layers, boundaries)?;

    let mut initial = code.generators().to_vec();
    initial.push(code.logical_x(1)?.clone());
    for j in 2..=n - 2 {
        initial.push(code.logical_z(j)?.clone());
    }
    let total = circuit.layers().len();
    let final_generators = initial
        .iter()
        .map(|g| circuit.conjugate_forward(g, 0, total))
        .collect::<Result<Vec<_>>>()?;
    Ok(GhzBenchmark {
        n,
        t,
        circuit,
        code,
        initial_generators: initial,
        final_generators,
    })
}

/// Fidelity indicator of a final frame: 1 iff it commutes with every
/// generator of the target stabilizer state.
#[inline]
pub fn commutes_with_all(frame: &PauliString, generators: &[PauliString]) -> bool {
    generators.iter().all(|g| !g.anticommutes_unchecked(frame))
}

//! Gate-level netlists and their per-gate CNF translation.
//!
//! Text format, one statement per line, `#` starts a comment:
//!
//! ```text
//! INPUT a
//! INPUT b
//! GATE AND z a b
//! GATE NOT nz z
//! OUTPUT nz
//! ```
//!
//! Gates may appear in any order; they are sorted topologically on load.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::GenError;
use crate::cnf::{Clause, CnfFormula, Literal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    And,
    Or,
    Not,
    Xor,
}

impl GateKind {
    pub const ALL: [GateKind; 4] = [GateKind::And, GateKind::Or, GateKind::Not, GateKind::Xor];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Not => 1,
            _ => 2,
        }
    }

    pub fn eval(self, inputs: &[bool]) -> bool {
        match self {
            GateKind::And => inputs[0] && inputs[1],
            GateKind::Or => inputs[0] || inputs[1],
            GateKind::Not => !inputs[0],
            GateKind::Xor => inputs[0] ^ inputs[1],
        }
    }

    /// Clauses relating output `z` to inputs, as signed variable triples.
    fn clauses(self, ins: &[usize], z: usize) -> Vec<Vec<Literal>> {
        let (p, n) = (Literal::pos, Literal::neg);
        match self {
            GateKind::And => {
                let (a, b) = (ins[0], ins[1]);
                vec![vec![p(a), n(z)], vec![p(b), n(z)], vec![n(a), n(b), p(z)]]
            }
            GateKind::Or => {
                let (a, b) = (ins[0], ins[1]);
                vec![vec![n(a), p(z)], vec![n(b), p(z)], vec![p(a), p(b), n(z)]]
            }
            GateKind::Not => {
                let a = ins[0];
                vec![vec![p(a), p(z)], vec![n(a), n(z)]]
            }
            GateKind::Xor => {
                let (a, b) = (ins[0], ins[1]);
                vec![
                    vec![p(a), p(b), n(z)],
                    vec![p(a), n(b), p(z)],
                    vec![n(a), n(b), n(z)],
                    vec![n(a), p(b), p(z)],
                ]
            }
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Not => "NOT",
            GateKind::Xor => "XOR",
        })
    }
}

impl FromStr for GateKind {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "AND" => Ok(GateKind::And),
            "OR" => Ok(GateKind::Or),
            "NOT" => Ok(GateKind::Not),
            "XOR" => Ok(GateKind::Xor),
            _ => Err(GenError::UnknownGate(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub inputs: Vec<String>,
    pub output: String,
}

impl Gate {
    pub fn new(kind: GateKind, output: impl Into<String>, inputs: &[&str]) -> Self {
        Gate { kind, inputs: inputs.iter().map(|s| s.to_string()).collect(), output: output.into() }
    }
}

/// A validated, topologically ordered netlist. Primary inputs occupy
/// variables `0..num_inputs`, gate outputs follow in gate order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateNetlist {
    inputs: Vec<String>,
    gates: Vec<Gate>,
    outputs: Vec<String>,
    wire_index: HashMap<String, usize>,
}

impl GateNetlist {
    pub fn new(inputs: Vec<String>, gates: Vec<Gate>, outputs: Vec<String>) -> Result<Self, GenError> {
        let mut drivers: HashMap<&str, Option<usize>> = HashMap::new();
        for w in &inputs {
            if drivers.insert(w, None).is_some() {
                return Err(GenError::DuplicateWire(w.clone()));
            }
        }
        for (gi, g) in gates.iter().enumerate() {
            if g.inputs.len() != g.kind.arity() {
                return Err(GenError::GateArity { gate: g.output.clone(), expected: g.kind.arity(), got: g.inputs.len() });
            }
            if g.inputs.len() == 2 && g.inputs[0] == g.inputs[1] {
                return Err(GenError::RepeatedGateInput(g.output.clone()));
            }
            if drivers.insert(&g.output, Some(gi)).is_some() {
                return Err(GenError::DuplicateWire(g.output.clone()));
            }
        }
        for w in gates.iter().flat_map(|g| &g.inputs).chain(&outputs) {
            if !drivers.contains_key(w.as_str()) {
                return Err(GenError::UnknownWire(w.clone()));
            }
        }

        // Depth-first topological sort; 1 = on stack, 2 = done.
        let mut state = vec![0u8; gates.len()];
        let mut order = Vec::with_capacity(gates.len());
        for root in 0..gates.len() {
            if state[root] != 0 {
                continue;
            }
            let mut stack = vec![(root, 0usize)];
            state[root] = 1;
            while let Some(&mut (gi, ref mut next)) = stack.last_mut() {
                if let Some(w) = gates[gi].inputs.get(*next) {
                    *next += 1;
                    if let Some(Some(dep)) = drivers.get(w.as_str()) {
                        match state[*dep] {
                            0 => {
                                state[*dep] = 1;
                                stack.push((*dep, 0));
                            }
                            1 => return Err(GenError::CyclicNetlist(w.clone())),
                            _ => {}
                        }
                    }
                } else {
                    state[gi] = 2;
                    order.push(gi);
                    stack.pop();
                }
            }
        }
        let mut slots: Vec<Option<Gate>> = gates.into_iter().map(Some).collect();
        let gates: Vec<Gate> = order.into_iter().map(|i| slots[i].take().expect("each gate once")).collect();
        let wire_index = inputs
            .iter()
            .chain(gates.iter().map(|g| &g.output))
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Ok(GateNetlist { inputs, gates, outputs, wire_index })
    }

    pub fn parse(text: &str) -> Result<Self, GenError> {
        let mut inputs = Vec::new();
        let mut gates = Vec::new();
        let mut outputs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: &str| GenError::NetlistSyntax { line: i + 1, reason: reason.to_string() };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens[0].to_ascii_uppercase().as_str() {
                "INPUT" if tokens.len() == 2 => inputs.push(tokens[1].to_string()),
                "OUTPUT" if tokens.len() == 2 => outputs.push(tokens[1].to_string()),
                "GATE" if tokens.len() >= 4 => {
                    let kind: GateKind = tokens[1].parse()?;
                    gates.push(Gate::new(kind, tokens[2], &tokens[3..]));
                }
                "INPUT" | "OUTPUT" => return Err(bad("expected exactly one wire name")),
                "GATE" => return Err(bad("expected GATE kind out in1 [in2]")),
                _ => return Err(bad("unknown statement")),
            }
        }
        GateNetlist::new(inputs, gates, outputs)
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn num_wires(&self) -> usize {
        self.inputs.len() + self.gates.len()
    }

    /// CNF variable of a wire.
    pub fn wire_var(&self, wire: &str) -> Option<usize> {
        self.wire_index.get(wire).copied()
    }

    /// Values of every wire, indexed like [`GateNetlist::wire_var`].
    pub fn simulate(&self, input_values: &[bool]) -> Result<Vec<bool>, GenError> {
        if input_values.len() != self.inputs.len() {
            return Err(GenError::InputCount { expected: self.inputs.len(), got: input_values.len() });
        }
        let mut values = input_values.to_vec();
        let mut scratch = Vec::with_capacity(2);
        for g in &self.gates {
            scratch.clear();
            scratch.extend(g.inputs.iter().map(|w| values[self.wire_index[w]]));
            values.push(g.kind.eval(&scratch));
        }
        Ok(values)
    }

    /// Values of the declared outputs for one input vector.
    pub fn evaluate_outputs(&self, input_values: &[bool]) -> Result<Vec<bool>, GenError> {
        let values = self.simulate(input_values)?;
        Ok(self.outputs.iter().map(|w| values[self.wire_index[w]]).collect())
    }
}

impl fmt::Display for GateNetlist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for w in &self.inputs {
            writeln!(f, "INPUT {w}")?;
        }
        for g in &self.gates {
            write!(f, "GATE {} {}", g.kind, g.output)?;
            for w in &g.inputs {
                write!(f, " {w}")?;
            }
            writeln!(f)?;
        }
        for w in &self.outputs {
            writeln!(f, "OUTPUT {w}")?;
        }
        Ok(())
    }
}

/// One variable per wire, the gate clauses, and a unit clause per constraint.
pub fn encode_circuit(c: &GateNetlist, output_constraints: &[(&str, bool)]) -> Result<CnfFormula, GenError> {
    let mut clauses = Vec::new();
    for g in &c.gates {
        let ins: Vec<usize> = g.inputs.iter().map(|w| c.wire_index[w]).collect();
        for lits in g.kind.clauses(&ins, c.wire_index[&g.output]) {
            clauses.push(Clause::new(lits).expect("gate inputs are distinct"));
        }
    }
    for &(wire, value) in output_constraints {
        let var = c.wire_var(wire).ok_or_else(|| GenError::UnknownWire(wire.to_string()))?;
        clauses.push(Clause::new([Literal::new(var, value)]).expect("unit clause"));
    }
    if clauses.is_empty() {
        return Err(GenError::NoClauses);
    }
    Ok(CnfFormula::new(c.num_wires(), clauses).expect("wire variables are in range"))
}

/// `bits`-wide ripple-carry adder with inputs `a0.., b0..` (least significant
/// first) and outputs `s0..s{bits}`, the last being the carry out.
pub fn ripple_adder(bits: usize) -> GateNetlist {
    assert!(bits > 0, "adder needs at least one bit");
    let mut inputs = Vec::new();
    for prefix in ["a", "b"] {
        inputs.extend((0..bits).map(|i| format!("{prefix}{i}")));
    }
    let mut gates = Vec::new();
    let carry_name = |i: usize| if i + 1 == bits { format!("s{bits}") } else { format!("c{i}") };
    for i in 0..bits {
        let (a, b) = (format!("a{i}"), format!("b{i}"));
        if i == 0 {
            gates.push(Gate::new(GateKind::Xor, "s0", &[&a, &b]));
            gates.push(Gate::new(GateKind::And, carry_name(0), &[&a, &b]));
            continue;
        }
        let cin = format!("c{}", i - 1);
        let (half, generate, propagate) = (format!("x{i}"), format!("g{i}"), format!("p{i}"));
        gates.push(Gate::new(GateKind::Xor, &half, &[&a, &b]));
        gates.push(Gate::new(GateKind::And, &generate, &[&a, &b]));
        gates.push(Gate::new(GateKind::Xor, format!("s{i}"), &[&half, &cin]));
        gates.push(Gate::new(GateKind::And, &propagate, &[&half, &cin]));
        gates.push(Gate::new(GateKind::Or, carry_name(i), &[&generate, &propagate]));
    }
    let outputs = (0..=bits).map(|i| format!("s{i}")).collect();
    GateNetlist::new(inputs, gates, outputs).expect("adder is well formed")
}

/// Random acyclic netlist: each gate reads distinct earlier wires, and the
/// last `num_outputs` gates are the outputs.
pub fn gen_random_circuit(
    num_inputs: usize,
    num_gates: usize,
    num_outputs: usize,
    seed: u64,
) -> Result<GateNetlist, GenError> {
    if num_inputs < 2 {
        return Err(GenError::TooFewVariables { needed: 2, got: num_inputs });
    }
    if num_outputs == 0 || num_outputs > num_gates {
        return Err(GenError::BadK { k: num_outputs, reason: "outputs must be between 1 and the gate count" });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wires: Vec<String> = (0..num_inputs).map(|i| format!("i{i}")).collect();
    let inputs = wires.clone();
    let mut gates = Vec::with_capacity(num_gates);
    for g in 0..num_gates {
        let kind = *GateKind::ALL.choose(&mut rng).expect("non-empty");
        let ins = rand::seq::index::sample(&mut rng, wires.len(), kind.arity());
        let names: Vec<&str> = ins.iter().map(|i| wires[i].as_str()).collect();
        let out = format!("w{g}");
        gates.push(Gate::new(kind, &out, &names));
        wires.push(out);
    }
    let outputs = (num_gates - num_outputs..num_gates).map(|g| format!("w{g}")).collect();
    GateNetlist::new(inputs, gates, outputs)
}

/// Output values produced by a random input vector drawn from `seed`, as
/// constraints that are satisfiable by construction.
pub fn simulated_output_target(c: &GateNetlist, seed: u64) -> Vec<(String, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ins: Vec<bool> = (0..c.inputs.len()).map(|_| rng.random_bool(0.5)).collect();
    let outs = c.evaluate_outputs(&ins).expect("input count matches");
    c.outputs.iter().cloned().zip(outs).collect()
}

/// Whether some input vector drives every constrained wire to its value.
pub fn constraints_reachable(c: &GateNetlist, constraints: &[(&str, bool)]) -> Result<bool, GenError> {
    let n = c.inputs.len();
    assert!(n < 32, "truth-table enumeration limited to 31 inputs");
    let vars: Vec<(usize, bool)> = constraints
        .iter()
        .map(|&(w, v)| c.wire_var(w).map(|i| (i, v)).ok_or_else(|| GenError::UnknownWire(w.to_string())))
        .collect::<Result<_, _>>()?;
    let mut ins = vec![false; n];
    for mask in 0u32..1 << n {
        for (i, b) in ins.iter_mut().enumerate() {
            *b = mask >> i & 1 == 1;
        }
        let values = c.simulate(&ins)?;
        if vars.iter().all(|&(i, v)| values[i] == v) {
            return Ok(true);
        }
    }
    Ok(false)
}

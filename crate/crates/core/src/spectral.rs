//! Perron–Frobenius data, entropy, the Parry measure, Markov comparison
//! measures and the normalized transfer operator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sft::{Digraph, SftSpec, VertexShift};

/// Tolerance and iteration cap for power iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions {
            tol: 1e-12,
            max_iter: 1_000_000,
        }
    }
}

/// Spectral radius with left and right Perron vectors, normalized so that
/// `Σ v = 1` and `u·v = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerronData {
    pub lambda: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub entropy_nats: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl PerronData {
    pub fn entropy_bits(&self) -> f64 {
        self.entropy_nats / std::f64::consts::LN_2
    }

    pub fn report_json(&self) -> serde_json::Value {
        serde_json::json!({
            "lambda": self.lambda,
            "entropy_nats": self.entropy_nats,
            "entropy_bits": self.entropy_bits(),
            "residual": self.residual,
            "iterations": self.iterations,
        })
    }
}

// power iteration on Q + I; returns (λ, vector with max entry 1, residual, iterations)
fn power_iterate(g: &Digraph, opts: PowerOptions) -> Result<(f64, Vec<f64>, f64, usize)> {
    let n = g.len();
    let mut v = vec![1.0; n];
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let mut qv = vec![0.0; n];
        for (i, q) in qv.iter_mut().enumerate() {
            *q = g.successors(i).iter().map(|&j| v[j]).sum();
        }
        let lambda = qv
            .iter()
            .zip(&v)
            .map(|(a, b)| a + b)
            .fold(0.0, f64::max)
            - 1.0;
        residual = qv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).abs())
            .fold(0.0, f64::max);
        if residual <= opts.tol {
            return Ok((lambda, polish(g, v, residual), residual, it));
        }
        let scale = lambda + 1.0;
        for (x, q) in v.iter_mut().zip(&qv) {
            *x = (*x + q) / scale;
        }
    }
    Err(Error::NoConvergence {
        tol: opts.tol,
        iterations: opts.max_iter,
        residual,
    })
}

// a few extra iterations once converged, down to rounding level
fn polish(g: &Digraph, mut v: Vec<f64>, mut residual: f64) -> Vec<f64> {
    for _ in 0..200 {
        let qv: Vec<f64> = (0..g.len())
            .map(|i| g.successors(i).iter().map(|&j| v[j]).sum())
            .collect();
        let scale = qv.iter().zip(&v).map(|(a, b)| a + b).fold(0.0, f64::max);
        let next: Vec<f64> = v.iter().zip(&qv).map(|(x, q)| (x + q) / scale).collect();
        let r = qv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - (scale - 1.0) * b).abs())
            .fold(0.0, f64::max);
        if r >= residual && r < 1e-14 {
            break;
        }
        residual = r;
        v = next;
    }
    v
}

fn residual_of(g: &Digraph, v: &[f64], lambda: f64) -> f64 {
    let norm = v.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    (0..g.len())
        .map(|i| (g.successors(i).iter().map(|&j| v[j]).sum::<f64>() - lambda * v[i]).abs())
        .fold(0.0, f64::max)
        / norm
}

/// Perron data of an irreducible graph.
pub fn perron(g: &Digraph, opts: PowerOptions) -> Result<PerronData> {
    if !g.is_transitive() {
        return Err(Error::Reducible);
    }
    let t = g.transpose();
    let (_, mut right, _, i1) = power_iterate(g, opts)?;
    let (_, mut left, _, i2) = power_iterate(&t, opts)?;
    let total: f64 = right.iter().sum();
    right.iter_mut().for_each(|x| *x /= total);
    let dot: f64 = left.iter().zip(&right).map(|(a, b)| a * b).sum();
    left.iter_mut().for_each(|x| *x /= dot);
    // two-sided Rayleigh quotient u·Q·v / u·v, accurate to second order
    let uqv: f64 = (0..g.len())
        .map(|i| left[i] * g.successors(i).iter().map(|&j| right[j]).sum::<f64>())
        .sum();
    let lambda = uqv;
    let residual = residual_of(g, &right, lambda).max(residual_of(&t, &left, lambda));
    Ok(PerronData {
        lambda,
        left,
        right,
        entropy_nats: lambda.ln(),
        residual,
        iterations: i1.max(i2),
    })
}

/// Entropy of a possibly reducible graph: the largest component entropy.
pub fn scc_entropy(g: &Digraph, opts: PowerOptions) -> Result<f64> {
    let mut best: Option<f64> = None;
    for comp in g.sccs() {
        if !g.is_cyclic_component(&comp) {
            continue;
        }
        let h = perron(&g.induced(&comp), opts)?.entropy_nats;
        best = Some(best.map_or(h, |b: f64| b.max(h)));
    }
    best.ok_or(Error::EmptyShift)
}

/// Topological entropy of an SFT, from the live core of its pattern automaton.
pub fn sft_entropy(spec: &SftSpec, opts: PowerOptions) -> Result<f64> {
    let core = spec.automaton().core_graph();
    if core.is_empty() {
        return Err(Error::EmptyShift);
    }
    scc_entropy(&core, opts)
}

/// The measure of maximal entropy of an irreducible vertex shift.
#[derive(Clone, Debug)]
pub struct ParryMeasure {
    shift: VertexShift,
    perron: PerronData,
}

impl ParryMeasure {
    pub fn new(shift: &VertexShift, opts: PowerOptions) -> Result<Self> {
        let perron = perron(shift.graph(), opts)?;
        Ok(ParryMeasure {
            shift: shift.clone(),
            perron,
        })
    }

    pub fn shift(&self) -> &VertexShift {
        &self.shift
    }

    pub fn perron(&self) -> &PerronData {
        &self.perron
    }

    /// Measure of the cylinder `[w]`; zero for words outside the language.
    pub fn cylinder(&self, w: &[u8]) -> Result<f64> {
        self.shift.alphabet().check(w)?;
        let (u, v) = (&self.perron.left, &self.perron.right);
        if w.len() < self.shift.order() {
            return Ok(self
                .shift
                .states_with_prefix(w)
                .into_iter()
                .map(|s| u[s] * v[s])
                .sum());
        }
        Ok(match self.shift.path(w) {
            Some(path) => {
                let k = path.len() - 1;
                u[path[0]] * v[path[k]] / self.perron.lambda.powi(k as i32)
            }
            None => 0.0,
        })
    }

    /// The Markov chain inducing this measure.
    pub fn markov_chain(&self) -> MarkovMeasure {
        let g = self.shift.graph();
        let n = g.len();
        let (u, v, lambda) = (&self.perron.left, &self.perron.right, self.perron.lambda);
        let mut p = vec![vec![0.0; n]; n];
        for (i, row) in p.iter_mut().enumerate() {
            for &j in g.successors(i) {
                row[j] += v[j] / (lambda * v[i]);
            }
        }
        let stationary = (0..n).map(|i| u[i] * v[i]).collect();
        MarkovMeasure {
            shift: self.shift.clone(),
            transitions: p,
            stationary,
        }
    }
}

/// A stationary Markov measure supported on the edges of a vertex shift.
#[derive(Clone, Debug)]
pub struct MarkovMeasure {
    shift: VertexShift,
    transitions: Vec<Vec<f64>>,
    stationary: Vec<f64>,
}

impl MarkovMeasure {
    /// Validate `transitions` (row-stochastic, supported on edges) and
    /// compute a stationary vector.
    pub fn new(shift: &VertexShift, transitions: Vec<Vec<f64>>) -> Result<Self> {
        let n = shift.len();
        if transitions.len() != n || transitions.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument(format!(
                "transition matrix must be {n}x{n}"
            )));
        }
        let q = shift.transition_matrix();
        for (i, row) in transitions.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if !(p >= 0.0 && p.is_finite()) {
                    return Err(Error::InvalidArgument(format!("P[{i}][{j}] = {p}")));
                }
                if p > 0.0 && q[i][j] == 0 {
                    return Err(Error::InvalidArgument(format!(
                        "P[{i}][{j}] > 0 on a missing edge"
                    )));
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!("row {i} sums to {sum}")));
            }
        }
        let stationary = stationary_vector(&transitions)?;
        Ok(MarkovMeasure {
            shift: shift.clone(),
            transitions,
            stationary,
        })
    }

    pub fn transitions(&self) -> &[Vec<f64>] {
        &self.transitions
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    pub fn shift(&self) -> &VertexShift {
        &self.shift
    }

    /// `−Σ π_i Σ_j P_ij ln P_ij`.
    pub fn entropy(&self) -> f64 {
        -self
            .stationary
            .iter()
            .zip(&self.transitions)
            .map(|(pi, row)| {
                pi * row
                    .iter()
                    .filter(|&&p| p > 0.0)
                    .map(|p| p * p.ln())
                    .sum::<f64>()
            })
            .sum::<f64>()
    }

    /// `π_{i₀} Π P_{i_t i_{t+1}}` along the path spelling `w`.
    pub fn cylinder(&self, w: &[u8]) -> Result<f64> {
        self.shift.alphabet().check(w)?;
        if w.len() < self.shift.order() {
            return Ok(self
                .shift
                .states_with_prefix(w)
                .into_iter()
                .map(|s| self.stationary[s])
                .sum());
        }
        Ok(match self.shift.path(w) {
            Some(path) => path
                .windows(2)
                .fold(self.stationary[path[0]], |acc, e| acc * self.transitions[e[0]][e[1]]),
            None => 0.0,
        })
    }
}

// lazy-chain power iteration; converges for periodic chains as well
fn stationary_vector(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    let mut pi = vec![1.0 / n as f64; n];
    let mut delta = f64::INFINITY;
    for _ in 0..1_000_000 {
        let mut next = vec![0.0; n];
        for (i, row) in p.iter().enumerate() {
            for (j, &pij) in row.iter().enumerate() {
                next[j] += pi[i] * pij;
            }
        }
        delta = next
            .iter()
            .zip(&pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        for (x, y) in pi.iter_mut().zip(&next) {
            *x = 0.5 * (*x + y);
        }
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|x| *x /= total);
        if delta <= 1e-15 {
            return Ok(pi);
        }
    }
    Err(Error::NoConvergence {
        tol: 1e-15,
        iterations: 1_000_000,
        residual: delta,
    })
}

/// Free-function form of [`MarkovMeasure::entropy`].
pub fn markov_entropy(m: &MarkovMeasure) -> f64 {
    m.entropy()
}

/// Free-function form of [`MarkovMeasure::cylinder`].
pub fn markov_cylinder(m: &MarkovMeasure, w: &[u8]) -> Result<f64> {
    m.cylinder(w)
}

/// Free-function form of [`ParryMeasure::cylinder`].
pub fn parry_cylinder(m: &ParryMeasure, w: &[u8]) -> Result<f64> {
    m.cylinder(w)
}

/// A function of the first recoded coordinate, one value per state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferFunction {
    pub values: Vec<f64>,
}

impl TransferFunction {
    pub fn new(values: Vec<f64>) -> Self {
        TransferFunction { values }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `1_S − μ(S)` for a set `S` of states, centred against a Parry measure.
    pub fn centred_indicator(measure: &ParryMeasure, states: &[usize]) -> Self {
        let (u, v) = (&measure.perron.left, &measure.perron.right);
        let mass: f64 = states.iter().map(|&s| u[s] * v[s]).sum();
        let mut values = vec![-mass; u.len()];
        for &s in states {
            values[s] += 1.0;
        }
        TransferFunction { values }
    }
}

/// Apply `ℒ₀ = λ⁻¹ Δ_h⁻¹ ℒ Δ_h` `n` times, with `h` the left Perron vector.
/// Returns the final function and `‖ℒ₀^k f‖∞` for `k = 0..=n`.
pub fn normalized_transfer_iterate(
    g: &Digraph,
    perron: &PerronData,
    start: &TransferFunction,
    n: usize,
) -> Result<(TransferFunction, Vec<f64>)> {
    if start.values.len() != g.len() || perron.left.len() != g.len() {
        return Err(Error::InvalidArgument(
            "function length must equal the number of states".into(),
        ));
    }
    if !(perron.residual.is_finite() && perron.lambda > 0.0) {
        return Err(Error::NoConvergence {
            tol: 0.0,
            iterations: perron.iterations,
            residual: perron.residual,
        });
    }
    let h = &perron.left;
    let pred = g.predecessors();
    let mut f = start.values.clone();
    let mut norms = vec![start.sup_norm()];
    for _ in 0..n {
        let next: Vec<f64> = (0..g.len())
            .map(|j| {
                pred[j].iter().map(|&i| h[i] * f[i]).sum::<f64>() / (perron.lambda * h[j])
            })
            .collect();
        f = next;
        norms.push(f.iter().fold(0.0, |m: f64, x| m.max(x.abs())));
    }
    Ok((TransferFunction::new(f), norms))
}

/// Geometric decay rate fitted by least squares to `ln norms[k]` over the
/// steps whose norm stays above `floor`, skipping the first `burn_in` steps.
pub fn fit_decay_rate(norms: &[f64], burn_in: usize, floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = norms
        .iter()
        .enumerate()
        .skip(burn_in)
        .take_while(|(_, &x)| x > floor)
        .map(|(k, &x)| (k as f64, x.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some((sxy / sxx).exp())
}

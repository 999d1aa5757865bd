//! Weighted finite-state transducers without ε-transitions, rational
//! kernels, and the graph-kernel specialization.

mod io;

use crate::error::{Error, Result};
use crate::graph::{transition_matrix, uniform_start_stop, Graph};
use crate::linalg::{dot, kron, max_abs_diff, SparseMatrix};
use crate::semiring::{Morphism, Semiring};

pub use io::{parse_transducer, write_transducer};

/// One transition, `A_{input, output}[src][dst] = weight`.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub src: usize,
    pub input: usize,
    pub output: usize,
    pub dst: usize,
    pub weight: f64,
}

/// A transducer with transition tensor `A ∈ 𝕂^{n×s×s×n}` stored as a sorted
/// list of non-zero transitions, initial weights `p` and final weights `q`.
/// The weight of a string pair is `qᵀ A_{a₁b₁} ⋯ A_{a_l b_l} p`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedTransducer {
    semiring: Semiring,
    states: usize,
    alphabet: usize,
    /// Sorted by `(input, output, src, dst)`.
    transitions: Vec<Transition>,
    /// `offsets[a·s + b]..offsets[a·s + b + 1]` indexes slice `A_ab`.
    offsets: Vec<usize>,
    initial: Vec<f64>,
    finals: Vec<f64>,
}

impl WeightedTransducer {
    /// Validates labels, states and weights, merges repeated transitions
    /// with `⊕` and drops `0̄` weights.
    pub fn new(
        semiring: Semiring,
        states: usize,
        alphabet: usize,
        transitions: Vec<Transition>,
        initial: Vec<f64>,
        finals: Vec<f64>,
    ) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::InvalidArgument("alphabet must be nonempty".into()));
        }
        if initial.len() != states || finals.len() != states {
            return Err(Error::DimensionMismatch(format!(
                "{} initial and {} final weights for {states} states",
                initial.len(),
                finals.len()
            )));
        }
        for &w in initial.iter().chain(&finals) {
            check_weight(semiring, w)?;
        }
        for t in &transitions {
            if t.src >= states || t.dst >= states {
                return Err(Error::InvalidArgument(format!("transition {} -> {} outside {states} states", t.src, t.dst)));
            }
            if t.input >= alphabet || t.output >= alphabet {
                return Err(Error::InvalidArgument(format!(
                    "label pair ({}, {}) outside alphabet of size {alphabet}",
                    t.input, t.output
                )));
            }
            check_weight(semiring, t.weight)?;
        }
        let mut sorted = transitions;
        sorted.sort_by_key(|t| (t.input, t.output, t.src, t.dst));
        let mut merged: Vec<Transition> = Vec::with_capacity(sorted.len());
        for t in sorted {
            match merged.last_mut() {
                Some(last) if (last.input, last.output, last.src, last.dst) == (t.input, t.output, t.src, t.dst) => {
                    last.weight = semiring.oplus(last.weight, t.weight);
                }
                _ => merged.push(t),
            }
        }
        merged.retain(|t| !semiring.is_zero(t.weight));
        let mut offsets = vec![0; alphabet * alphabet + 1];
        for t in &merged {
            offsets[t.input * alphabet + t.output + 1] += 1;
        }
        for k in 1..offsets.len() {
            offsets[k] += offsets[k - 1];
        }
        Ok(Self { semiring, states, alphabet, transitions: merged, offsets, initial, finals })
    }

    pub fn semiring(&self) -> Semiring {
        self.semiring
    }

    pub fn num_states(&self) -> usize {
        self.states
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn finals(&self) -> &[f64] {
        &self.finals
    }

    /// Transitions of slice `A_ab`.
    pub fn slice(&self, a: usize, b: usize) -> &[Transition] {
        let k = a * self.alphabet + b;
        &self.transitions[self.offsets[k]..self.offsets[k + 1]]
    }

    /// `A_ab ⊙̄ v`.
    fn apply_slice(&self, a: usize, b: usize, v: &[f64]) -> Vec<f64> {
        let s = self.semiring;
        let mut out = vec![s.zero(); self.states];
        for t in self.slice(a, b) {
            out[t.src] = s.oplus(out[t.src], s.odot(t.weight, v[t.dst]));
        }
        out
    }

    fn check_labels(&self, word: &[usize]) -> Result<()> {
        match word.iter().find(|&&a| a >= self.alphabet) {
            Some(a) => Err(Error::InvalidArgument(format!("label {a} outside alphabet of size {}", self.alphabet))),
            None => Ok(()),
        }
    }

    /// `⟦T⟧(α, β) = qᵀ ⊙̄ A_{a₁b₁} ⊙̄ ⋯ ⊙̄ A_{a_l b_l} ⊙̄ p`, and `0̄` when the
    /// lengths differ.
    pub fn output_weight(&self, alpha: &[usize], beta: &[usize]) -> Result<f64> {
        self.check_labels(alpha)?;
        self.check_labels(beta)?;
        if alpha.len() != beta.len() {
            return Ok(self.semiring.zero());
        }
        let s = self.semiring;
        let mut v = self.initial.clone();
        for (&a, &b) in alpha.iter().zip(beta).rev() {
            v = self.apply_slice(a, b, &v);
        }
        Ok(s.sum(self.finals.iter().zip(&v).map(|(&q, &x)| s.odot(q, x))))
    }

    /// Swaps input and output labels: `B_ab = A_ba`.
    pub fn inverse(&self) -> WeightedTransducer {
        let swapped = self
            .transitions
            .iter()
            .map(|t| Transition { input: t.output, output: t.input, ..t.clone() })
            .collect();
        WeightedTransducer::new(self.semiring, self.states, self.alphabet, swapped, self.initial.clone(), self.finals.clone())
            .expect("inverse of a valid transducer")
    }

    /// `T ∘ T′` on states `Q × Q′` (state `(i, i′)` at `i·n′ + i′`) with
    /// `B_ab = ⊕_c A_ac ⊗̄ A′_cb`, `p∘ = p ⊗̄ p′` and `q∘ = q ⊗̄ q′`. Only
    /// pairs of stored transitions with matching middle labels are visited.
    pub fn compose(&self, other: &WeightedTransducer) -> Result<WeightedTransducer> {
        if self.semiring != other.semiring {
            return Err(Error::InvalidArgument(format!(
                "cannot compose {} and {} transducers",
                self.semiring, other.semiring
            )));
        }
        if self.alphabet != other.alphabet {
            return Err(Error::InvalidArgument(format!(
                "alphabet sizes differ: {} and {}",
                self.alphabet, other.alphabet
            )));
        }
        let s = self.semiring;
        let (n2, sz) = (other.states, self.alphabet);
        let mut out = Vec::new();
        for a in 0..sz {
            for c in 0..sz {
                let left = self.slice(a, c);
                if left.is_empty() {
                    continue;
                }
                for b in 0..sz {
                    for t in left {
                        for u in other.slice(c, b) {
                            out.push(Transition {
                                src: t.src * n2 + u.src,
                                input: a,
                                output: b,
                                dst: t.dst * n2 + u.dst,
                                weight: s.odot(t.weight, u.weight),
                            });
                        }
                    }
                }
            }
        }
        let pair = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().flat_map(|&a| y.iter().map(move |&b| s.odot(a, b))).collect() };
        WeightedTransducer::new(
            s,
            self.states * n2,
            sz,
            out,
            pair(&self.initial, &other.initial),
            pair(&self.finals, &other.finals),
        )
    }

    /// `Σ_{a,b} ψ(A_ab)` as a real sparse matrix.
    fn real_image(&self, psi: &Morphism) -> SparseMatrix {
        let triplets: Vec<(usize, usize, f64)> =
            self.transitions.iter().map(|t| (t.src, t.dst, psi.apply(t.weight))).collect();
        SparseMatrix::from_triplets(self.states, self.states, &triplets).expect("states in range")
    }
}

fn check_weight(s: Semiring, w: f64) -> Result<()> {
    if s.contains(w) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("weight {w} is not an element of the {s} semiring")))
    }
}

/// A transducer whose transitions all carry equal input and output labels.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedAutomaton(WeightedTransducer);

impl WeightedAutomaton {
    /// Transitions `(src, label, dst, weight)`.
    pub fn new(
        semiring: Semiring,
        states: usize,
        alphabet: usize,
        transitions: &[(usize, usize, usize, f64)],
        initial: Vec<f64>,
        finals: Vec<f64>,
    ) -> Result<Self> {
        let t = transitions
            .iter()
            .map(|&(src, a, dst, weight)| Transition { src, input: a, output: a, dst, weight })
            .collect();
        Ok(Self(WeightedTransducer::new(semiring, states, alphabet, t, initial, finals)?))
    }

    pub fn from_transducer(t: WeightedTransducer) -> Result<Self> {
        if t.transitions.iter().any(|x| x.input != x.output) {
            return Err(Error::InvalidArgument("transducer has transitions with distinct input and output labels".into()));
        }
        Ok(Self(t))
    }

    pub fn as_transducer(&self) -> &WeightedTransducer {
        &self.0
    }

    pub fn into_transducer(self) -> WeightedTransducer {
        self.0
    }

    /// `⟦G⟧(α) = ⟦G⟧(α, α)`.
    pub fn output_weight(&self, alpha: &[usize]) -> Result<f64> {
        self.0.output_weight(alpha, alpha)
    }
}

/// `qᵀ ⊙̄ Aᵏ ⊙̄ p` for a single-letter automaton.
pub fn automaton_output_weight(g: &WeightedAutomaton, k: usize) -> Result<f64> {
    if g.0.alphabet != 1 {
        return Err(Error::InvalidArgument(format!("expected a one-letter alphabet, got {}", g.0.alphabet)));
    }
    g.output_weight(&vec![0; k])
}

/// `ψ(⟦T⟧(α, β))`.
pub fn rational_kernel(t: &WeightedTransducer, alpha: &[usize], beta: &[usize], psi: &Morphism) -> Result<f64> {
    Ok(psi.apply(t.output_weight(alpha, beta)?))
}

/// `Σ_{|α| = |β| ≤ L_max} ψ(⟦S ∘ T ∘ U⟧(α, β))`, summed per length as
/// `ψ(q)ᵀ (Σ_{a,b} ψ(A_ab))ˡ ψ(p)` for the composed machine.
pub fn transducer_kernel(
    s: &WeightedTransducer,
    u: &WeightedTransducer,
    t: &WeightedTransducer,
    psi: &Morphism,
    l_max: usize,
) -> Result<f64> {
    let c = s.compose(t)?.compose(u)?;
    let m = c.real_image(psi);
    let mut v: Vec<f64> = c.initial.iter().map(|&x| psi.apply(x)).collect();
    let q: Vec<f64> = c.finals.iter().map(|&x| psi.apply(x)).collect();
    let mut total = dot(&q, &v);
    for _ in 0..l_max {
        v = m.mul_vec(&v)?;
        total += dot(&q, &v);
    }
    if !total.is_finite() {
        return Err(Error::NonFinite("transducer kernel".into()));
    }
    Ok(total)
}

/// Real single-letter automaton whose transition matrix is `D⁺Ã`.
pub fn graph_as_automaton(g: &Graph, p: &[f64], q: &[f64]) -> Result<WeightedAutomaton> {
    let n = g.num_vertices();
    if p.len() != n || q.len() != n {
        return Err(Error::DimensionMismatch(format!("distributions must have length {n}")));
    }
    let t: Vec<(usize, usize, usize, f64)> = transition_matrix(g).iter().map(|(i, j, w)| (i, 0, j, w)).collect();
    WeightedAutomaton::new(Semiring::Real, n, 1, &t, p.to_vec(), q.to_vec())
}

/// Per-term comparison of the composed-automaton route with explicit
/// Kronecker powers.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    /// `⟦G ∘ G′⟧(aᵏ)` for `k = 1..=K_max`.
    pub transducer_terms: Vec<f64>,
    /// `q×ᵀ A×ᵏ p×` for `k = 1..=K_max`.
    pub linalg_terms: Vec<f64>,
    pub max_abs_diff: f64,
    pub passed: bool,
}

/// Compares `⟦G ∘ G′⟧(aᵏ)` with `q×ᵀ A×ᵏ p×`, `A× = A ⊗ A′`, for uniform
/// distributions and `1 ≤ k ≤ K_max`; passes at `1e-10`.
pub fn rw_equivalence_check(g: &Graph, h: &Graph, k_max: usize) -> Result<EquivalenceReport> {
    let (p, q) = uniform_start_stop(g);
    let (pp, qp) = uniform_start_stop(h);
    let composed = WeightedAutomaton::from_transducer(
        graph_as_automaton(g, &p, &q)?.0.compose(&graph_as_automaton(h, &pp, &qp)?.0)?,
    )?;
    let transducer_terms = (1..=k_max).map(|k| automaton_output_weight(&composed, k)).collect::<Result<Vec<_>>>()?;

    let ax = kron(&transition_matrix(g).to_dense(), &transition_matrix(h).to_dense());
    let px: Vec<f64> = p.iter().flat_map(|&a| pp.iter().map(move |&b| a * b)).collect();
    let qx: Vec<f64> = q.iter().flat_map(|&a| qp.iter().map(move |&b| a * b)).collect();
    let mut v = px;
    let mut linalg_terms = Vec::with_capacity(k_max);
    for _ in 0..k_max {
        v = ax.mul_vec(&v)?;
        linalg_terms.push(dot(&qx, &v));
    }
    let diff = max_abs_diff(&transducer_terms, &linalg_terms);
    Ok(EquivalenceReport { passed: diff <= 1e-10, max_abs_diff: diff, transducer_terms, linalg_terms })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(w: f64) -> WeightedTransducer {
        let t = vec![
            Transition { src: 0, input: 0, output: 0, dst: 1, weight: w },
            Transition { src: 1, input: 1, output: 1, dst: 2, weight: 1.0 },
        ];
        WeightedTransducer::new(Semiring::Real, 3, 2, t, vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]).unwrap()
    }

    fn words(alphabet: usize, max_len: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        let mut frontier = vec![vec![]];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                for a in 0..alphabet {
                    let mut x: Vec<usize> = w.clone();
                    x.push(a);
                    next.push(x);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    #[test]
    fn chain_accepts_one_pair() {
        let t = chain(2.5);
        for a in words(2, 3) {
            for b in words(2, 3) {
                let expected = if a == [0, 1] && b == [0, 1] { 2.5 } else { 0.0 };
                assert_eq!(t.output_weight(&a, &b).unwrap(), expected, "{a:?} {b:?}");
            }
        }
        assert!(t.output_weight(&[2], &[0]).is_err());
    }

    #[test]
    fn single_state_unit() {
        let t = WeightedTransducer::new(
            Semiring::Real,
            1,
            1,
            vec![Transition { src: 0, input: 0, output: 0, dst: 0, weight: 1.0 }],
            vec![1.0],
            vec![1.0],
        )
        .unwrap();
        for k in 0..6 {
            assert_eq!(t.output_weight(&vec![0; k], &vec![0; k]).unwrap(), 1.0);
        }
    }

    #[test]
    fn inverse_swaps_tapes() {
        let t = WeightedTransducer::new(
            Semiring::Real,
            2,
            2,
            vec![
                Transition { src: 0, input: 0, output: 1, dst: 1, weight: 0.5 },
                Transition { src: 1, input: 1, output: 1, dst: 0, weight: 2.0 },
                Transition { src: 1, input: 1, output: 0, dst: 1, weight: 3.0 },
            ],
            vec![1.0, 0.5],
            vec![0.25, 1.0],
        )
        .unwrap();
        let inv = t.inverse();
        assert_eq!(inv.inverse(), t);
        for a in words(2, 3) {
            for b in words(2, 3) {
                assert_eq!(inv.output_weight(&a, &b).unwrap(), t.output_weight(&b, &a).unwrap());
            }
        }
    }

    #[test]
    fn composition_sums_over_middle_strings() {
        let t = chain(2.0);
        let u = t.inverse().compose(&chain(3.0)).unwrap();
        let c = t.compose(&u).unwrap();
        assert_eq!(c.num_states(), t.num_states() * u.num_states());
        let all = words(2, 3);
        for a in &all {
            for b in &all {
                let brute: f64 = all
                    .iter()
                    .map(|g| t.output_weight(a, g).unwrap() * u.output_weight(g, b).unwrap())
                    .sum();
                assert!((c.output_weight(a, b).unwrap() - brute).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn graph_specialization() {
        let k2 = Graph::complete(2);
        let r = rw_equivalence_check(&k2, &k2, 4).unwrap();
        assert!(r.passed);
        assert!((r.transducer_terms[0] - 0.25).abs() < 1e-15);
        let e = rw_equivalence_check(&k2, &Graph::edgeless(3), 3).unwrap();
        assert!(e.passed && e.transducer_terms.iter().all(|&x| x == 0.0));
        let g = graph_as_automaton(&k2, &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert_eq!(automaton_output_weight(&g, 0).unwrap(), 0.5);
    }

    #[test]
    fn string_counting_kernel() {
        let s = 3;
        let unit_acceptor = || {
            let t: Vec<_> = (0..s).map(|a| (0, a, 0, 1.0)).collect();
            WeightedAutomaton::new(Semiring::Real, 1, s, &t, vec![1.0], vec![1.0]).unwrap().into_transducer()
        };
        let id = unit_acceptor();
        let psi = Semiring::Real.morphism().unwrap();
        for l in 0..5 {
            let v = transducer_kernel(&unit_acceptor(), &unit_acceptor(), &id, &psi, l).unwrap();
            let expected: f64 = (0..=l).map(|k| (s as f64).powi(k as i32)).sum();
            assert_eq!(v, expected);
        }
    }

    #[test]
    fn tropical_path_weight() {
        // path 0 - 1 - 2 with weights 1 and 5, both directions
        let t = [(0, 0, 1, 1.0), (1, 0, 0, 1.0), (1, 0, 2, 5.0), (2, 0, 1, 5.0)];
        let zero = f64::NEG_INFINITY;
        let g = WeightedAutomaton::new(Semiring::Tropical, 3, 1, &t, vec![0.0; 3], vec![0.0; 3]).unwrap();
        assert_eq!(automaton_output_weight(&g, 2).unwrap(), 10.0);
        assert_eq!(automaton_output_weight(&g, 3).unwrap(), 15.0);
        let start_at_0 = WeightedAutomaton::new(Semiring::Tropical, 3, 1, &t, vec![0.0; 3], vec![0.0, zero, zero]).unwrap();
        assert_eq!(automaton_output_weight(&start_at_0, 1).unwrap(), 1.0);
    }
}

//! Classical-quantum states Σ p(c₁..c_m) |c₁..c_m⟩⟨c₁..c_m| ⊗ ρ^{c₁..c_m}.

use super::entropy::{psd_entropy, shannon_entropy};
use super::matrix::CMatrix;
use super::state::DensityOperator;
use super::STRUCTURAL_TOL;
use crate::error::{QrpsError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub label: String,
    pub size: usize,
}

impl Axis {
    pub fn new(label: impl Into<String>, size: usize) -> Self {
        Self {
            label: label.into(),
            size,
        }
    }
}

/// A register of a cq-state: one classical axis or the quantum block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Classical(usize),
    Quantum,
}

/// Joint pmf over classical axes (row-major, last axis fastest) with one
/// quantum block per classical index tuple. Blocks are stored once and
/// referenced by index, since many tuples share the same conditional state.
#[derive(Clone, Debug)]
pub struct ClassicalQuantumState {
    axes: Vec<Axis>,
    pmf: Vec<f64>,
    states: Vec<DensityOperator>,
    block_of: Vec<usize>,
    qdim: usize,
}

impl ClassicalQuantumState {
    /// One block per classical tuple.
    pub fn new(axes: Vec<Axis>, pmf: Vec<f64>, blocks: Vec<DensityOperator>) -> Result<Self> {
        let idx = (0..blocks.len()).collect();
        Self::with_shared_blocks(axes, pmf, blocks, idx)
    }

    /// `block_of[i]` names the entry of `states` attached to flat index i.
    pub fn with_shared_blocks(
        axes: Vec<Axis>,
        pmf: Vec<f64>,
        states: Vec<DensityOperator>,
        block_of: Vec<usize>,
    ) -> Result<Self> {
        let total: usize = axes.iter().map(|a| a.size).product();
        if axes.iter().any(|a| a.size == 0) {
            return Err(QrpsError::dimension("classical axes must be non-empty"));
        }
        if pmf.len() != total || block_of.len() != total {
            return Err(QrpsError::dimension(format!(
                "cq-state with {total} classical tuples got {} probabilities and {} blocks",
                pmf.len(),
                block_of.len()
            )));
        }
        if pmf
            .iter()
            .any(|&p| !(p >= -STRUCTURAL_TOL) || !p.is_finite())
        {
            return Err(QrpsError::validation(
                "pmf has negative or non-finite entries",
            ));
        }
        let sum: f64 = pmf.iter().sum();
        if (sum - 1.0).abs() > STRUCTURAL_TOL {
            return Err(QrpsError::validation(format!(
                "pmf not normalized (sum {sum})"
            )));
        }
        let qdim = states
            .first()
            .ok_or_else(|| QrpsError::validation("cq-state needs at least one block"))?
            .dim();
        if states.iter().any(|s| s.dim() != qdim) {
            return Err(QrpsError::dimension("cq-state blocks differ in dimension"));
        }
        if block_of.iter().any(|&b| b >= states.len()) {
            return Err(QrpsError::dimension("block index out of range"));
        }
        Ok(Self {
            axes,
            pmf: pmf.into_iter().map(|p| p.max(0.0)).collect(),
            states,
            block_of,
            qdim,
        })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, label: &str) -> Option<usize> {
        self.axes.iter().position(|a| a.label == label)
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn quantum_dim(&self) -> usize {
        self.qdim
    }

    pub fn block(&self, flat: usize) -> &DensityOperator {
        &self.states[self.block_of[flat]]
    }

    /// Flat index of a classical tuple.
    pub fn flat_index(&self, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.axes.len());
        tuple
            .iter()
            .zip(&self.axes)
            .fold(0, |acc, (&v, a)| acc * a.size + v)
    }

    fn group_keys(&self, classical: &[usize]) -> (Vec<usize>, usize) {
        let n = self.axes.len();
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.axes[i + 1].size;
        }
        let groups: usize = classical.iter().map(|&a| self.axes[a].size).product();
        let keys = (0..self.pmf.len())
            .map(|flat| {
                classical.iter().fold(0, |acc, &a| {
                    acc * self.axes[a].size + (flat / strides[a]) % self.axes[a].size
                })
            })
            .collect();
        (keys, groups)
    }

    fn check_parts(&self, parts: &[Part]) -> Result<(Vec<usize>, bool)> {
        let mut classical = Vec::new();
        let mut quantum = false;
        for p in parts {
            match *p {
                Part::Classical(a) if a < self.axes.len() => {
                    if classical.contains(&a) {
                        return Err(QrpsError::dimension(format!("axis {a} listed twice")));
                    }
                    classical.push(a);
                }
                Part::Classical(a) => {
                    return Err(QrpsError::dimension(format!("no classical axis {a}")))
                }
                Part::Quantum => quantum = true,
            }
        }
        classical.sort_unstable();
        Ok((classical, quantum))
    }

    /// Joint entropy of the listed registers in bits.
    ///
    /// With the quantum block included, H(K,B) = Σ_k S(Σ_{rest} p ρ), where
    /// each inner sum is an unnormalized block.
    pub fn entropy(&self, parts: &[Part]) -> Result<f64> {
        let (classical, quantum) = self.check_parts(parts)?;
        let (keys, groups) = self.group_keys(&classical);
        if !quantum {
            let mut marg = vec![0.0; groups];
            for (k, p) in keys.iter().zip(&self.pmf) {
                marg[*k] += p;
            }
            return Ok(shannon_entropy(&marg));
        }
        let mut blocks = vec![CMatrix::zeros(self.qdim, self.qdim); groups];
        for (flat, (&k, &p)) in keys.iter().zip(&self.pmf).enumerate() {
            if p > 0.0 {
                blocks[k].add_scaled(p, self.block(flat).matrix());
            }
        }
        Ok(blocks.iter().map(psd_entropy).sum::<f64>().max(0.0))
    }

    pub fn mutual_information(&self, a: &[Part], b: &[Part]) -> Result<f64> {
        self.conditional_mutual_information(a, b, &[])
    }

    /// I(A;B|C) = H(AC) + H(BC) − H(ABC) − H(C).
    pub fn conditional_mutual_information(
        &self,
        a: &[Part],
        b: &[Part],
        c: &[Part],
    ) -> Result<f64> {
        let cat = |x: &[Part], y: &[Part]| -> Vec<Part> { x.iter().chain(y).copied().collect() };
        let ac = cat(a, c);
        let bc = cat(b, c);
        let abc = cat(&ac, b);
        Ok(self.entropy(&ac)? + self.entropy(&bc)? - self.entropy(&abc)? - self.entropy(c)?)
    }

    /// Σ_k p(k) ρ^k over all classical indices (the quantum marginal).
    pub fn quantum_marginal(&self) -> DensityOperator {
        let mut m = CMatrix::zeros(self.qdim, self.qdim);
        for (flat, &p) in self.pmf.iter().enumerate() {
            if p > 0.0 {
                m.add_scaled(p, self.block(flat).matrix());
            }
        }
        DensityOperator::from_trusted(m.hermitian_part())
    }
}

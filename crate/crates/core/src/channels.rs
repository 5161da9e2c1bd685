//! Random-parameter channels {N^(s)} with parameter pmf q(s), the standard
//! qubit examples, and distortion functions.

use crate::error::{QrpsError, Result};
use crate::qlinalg::eigen::psd_sqrt;
use crate::qlinalg::{pauli, CMatrix, DensityOperator, Ket, KrausChannel, Povm, STRUCTURAL_TOL};

/// How the channel was built. Measurement and classical-quantum channels are
/// entanglement breaking by construction; nothing is inferred.
#[derive(Clone, Debug, PartialEq)]
pub enum ChannelKind {
    General,
    /// Every map measures and writes the outcome into `basis`.
    Measurement {
        povms: Vec<Povm>,
        basis: Vec<Ket>,
    },
    ClassicalQuantum,
}

impl ChannelKind {
    pub fn tag(&self) -> &'static str {
        match self {
            ChannelKind::General => "general",
            ChannelKind::Measurement { .. } => "measurement",
            ChannelKind::ClassicalQuantum => "classical-quantum",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RandomParameterChannel {
    labels: Vec<String>,
    q: Vec<f64>,
    maps: Vec<KrausChannel>,
    kind: ChannelKind,
}

pub(crate) fn check_pmf(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() {
        return Err(QrpsError::validation(format!("{what}: empty pmf")));
    }
    if p.iter().any(|&x| !x.is_finite() || x < -STRUCTURAL_TOL) {
        return Err(QrpsError::validation(format!(
            "{what}: pmf has negative or non-finite entries"
        )));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > STRUCTURAL_TOL {
        return Err(QrpsError::validation(format!(
            "{what}: pmf not normalized (sum {sum})"
        )));
    }
    Ok(())
}

fn check_probability(eps: f64, hi: f64, name: &str) -> Result<()> {
    if !(0.0..=hi).contains(&eps) {
        return Err(QrpsError::validation(format!(
            "{name} = {eps} outside [0, {hi}]"
        )));
    }
    Ok(())
}

impl RandomParameterChannel {
    pub fn new(q: Vec<f64>, maps: Vec<KrausChannel>) -> Result<Self> {
        Self::with_kind(q, maps, ChannelKind::General)
    }

    fn with_kind(q: Vec<f64>, maps: Vec<KrausChannel>, kind: ChannelKind) -> Result<Self> {
        check_pmf(&q, "parameter distribution q")?;
        if maps.len() != q.len() {
            return Err(QrpsError::dimension(format!(
                "{} parameter weights but {} maps",
                q.len(),
                maps.len()
            )));
        }
        let (din, dout) = (maps[0].in_dim(), maps[0].out_dim());
        if maps
            .iter()
            .any(|m| m.in_dim() != din || m.out_dim() != dout)
        {
            return Err(QrpsError::dimension("parameter maps differ in dimensions"));
        }
        let labels = (0..q.len()).map(|s| s.to_string()).collect();
        Ok(Self {
            labels,
            q,
            maps,
            kind,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.q.len() {
            return Err(QrpsError::dimension(
                "label count differs from parameter count",
            ));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn maps(&self) -> &[KrausChannel] {
        &self.maps
    }

    pub fn map(&self, s: usize) -> &KrausChannel {
        &self.maps[s]
    }

    pub fn kind(&self) -> &ChannelKind {
        &self.kind
    }

    pub fn num_params(&self) -> usize {
        self.q.len()
    }

    pub fn in_dim(&self) -> usize {
        self.maps[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.maps[0].out_dim()
    }

    pub fn is_measurement(&self) -> bool {
        matches!(self.kind, ChannelKind::Measurement { .. })
    }

    /// Σ_s q(s) N^(s) as one Kraus channel (operators weighted by √q(s)).
    pub fn average_channel(&self) -> KrausChannel {
        let ops = self
            .q
            .iter()
            .zip(&self.maps)
            .filter(|(&w, _)| w > 0.0)
            .flat_map(|(&w, m)| m.kraus_ops().iter().map(move |k| k.scale(w.sqrt())))
            .collect();
        KrausChannel::from_trusted(self.in_dim(), self.out_dim(), ops)
    }

    /// N^{⊗k} with parameter tuples in row-major order and product weights.
    pub fn tensor_power(&self, k: usize) -> Result<RandomParameterChannel> {
        if k == 0 {
            return Err(QrpsError::Config(
                "tensor power k must be at least 1".into(),
            ));
        }
        let mut out = self.clone();
        for _ in 1..k {
            let mut q = Vec::new();
            let mut maps = Vec::new();
            let mut labels = Vec::new();
            for (i, (qa, ma)) in out.q.iter().zip(&out.maps).enumerate() {
                for (j, (qb, mb)) in self.q.iter().zip(&self.maps).enumerate() {
                    q.push(qa * qb);
                    maps.push(ma.tensor(mb));
                    labels.push(format!("{},{}", out.labels[i], self.labels[j]));
                }
            }
            let kind = match (&out.kind, &self.kind) {
                (
                    ChannelKind::Measurement {
                        povms: pa,
                        basis: ba,
                    },
                    ChannelKind::Measurement {
                        povms: pb,
                        basis: bb,
                    },
                ) => {
                    let povms = pa
                        .iter()
                        .flat_map(|a| pb.iter().map(move |b| a.tensor(b)))
                        .collect();
                    let basis = ba
                        .iter()
                        .flat_map(|a| bb.iter().map(move |b| a.tensor(b)))
                        .collect();
                    ChannelKind::Measurement { povms, basis }
                }
                (ChannelKind::General, _) | (_, ChannelKind::General) => ChannelKind::General,
                _ => ChannelKind::ClassicalQuantum,
            };
            out = RandomParameterChannel {
                labels,
                q,
                maps,
                kind,
            };
        }
        Ok(out)
    }

    /// Every N^(s) followed by `povm`, as a measurement-kind channel with the
    /// outcomes written into the computational basis.
    pub fn measured(&self, povm: &Povm) -> Result<RandomParameterChannel> {
        if povm.dim() != self.out_dim() {
            return Err(QrpsError::dimension(format!(
                "POVM on dim {} cannot follow channel output dim {}",
                povm.dim(),
                self.out_dim()
            )));
        }
        let povms = self
            .maps
            .iter()
            .map(|m| {
                let els = povm
                    .elements()
                    .iter()
                    .map(|e| m.apply_adjoint(e).hermitian_part())
                    .collect();
                Povm::from_elements(els)
            })
            .collect::<Result<Vec<_>>>()?;
        make_measurement_rpc(self.q.clone(), povms, None)?.with_labels(self.labels.clone())
    }

    /// Per-parameter outcome POVMs for measurement-kind channels.
    pub fn outcome_povms(&self) -> Option<&[Povm]> {
        match &self.kind {
            ChannelKind::Measurement { povms, .. } => Some(povms),
            _ => None,
        }
    }

    /// V^(s) = N^(s) ∘ F^(s) for one pre-processing channel per parameter.
    pub fn precompose(&self, f: &[KrausChannel]) -> Result<RandomParameterChannel> {
        if f.len() != self.num_params() {
            return Err(QrpsError::dimension(format!(
                "{} pre-processing channels for {} parameters",
                f.len(),
                self.num_params()
            )));
        }
        let maps = f
            .iter()
            .zip(&self.maps)
            .map(|(fs, ns)| fs.then(ns))
            .collect::<Result<Vec<_>>>()?;
        let kind = match &self.kind {
            ChannelKind::Measurement { povms, basis } => ChannelKind::Measurement {
                povms: povms
                    .iter()
                    .zip(f)
                    .map(|(p, fs)| {
                        Povm::from_elements(
                            p.elements()
                                .iter()
                                .map(|e| fs.apply_adjoint(e).hermitian_part())
                                .collect(),
                        )
                    })
                    .collect::<Result<Vec<_>>>()?,
                basis: basis.clone(),
            },
            other => other.clone(),
        };
        Ok(RandomParameterChannel {
            labels: self.labels.clone(),
            q: self.q.clone(),
            maps,
            kind,
        })
    }
}

/// Identity with probability 1−ε, phase flip Z·Z with probability ε.
pub fn make_dephasing_rpc(epsilon: f64) -> Result<RandomParameterChannel> {
    check_probability(epsilon, 1.0, "dephasing epsilon")?;
    RandomParameterChannel::new(
        vec![1.0 - epsilon, epsilon],
        vec![
            KrausChannel::identity(2),
            KrausChannel::unitary(pauli::z())?,
        ],
    )
}

/// Pauli channel with q = (1−ε, ε/3, ε/3, ε/3) over {I, X, Y, Z}.
pub fn make_depolarizing_rpc(epsilon: f64) -> Result<RandomParameterChannel> {
    check_probability(epsilon, 0.375, "depolarizing epsilon")?;
    let e3 = epsilon / 3.0;
    RandomParameterChannel::new(
        vec![1.0 - epsilon, e3, e3, e3],
        vec![
            KrausChannel::identity(2),
            KrausChannel::unitary(pauli::x())?,
            KrausChannel::unitary(pauli::y())?,
            KrausChannel::unitary(pauli::z())?,
        ],
    )
}

/// Identity for s=0; for s=1 the input is discarded and replaced by |ψ⟩⟨ψ|.
pub fn make_projection_rpc(epsilon: f64, psi: &Ket) -> Result<RandomParameterChannel> {
    check_probability(epsilon, 1.0, "projection epsilon")?;
    if psi.dim() != 2 {
        return Err(QrpsError::dimension("projection target must be a qubit"));
    }
    let psi = Ket::new(psi.amplitudes().to_vec())?;
    // K_j = |ψ⟩⟨j|
    let ops = (0..2)
        .map(|j| CMatrix::outer(psi.amplitudes(), Ket::basis(2, j).amplitudes()))
        .collect();
    RandomParameterChannel::new(
        vec![1.0 - epsilon, epsilon],
        vec![KrausChannel::identity(2), KrausChannel::new(ops)?],
    )
}

/// Measure-and-write channels M^(s)(ρ) = Σ_y Tr(Λ^s_y ρ) |b_y⟩⟨b_y|.
///
/// `basis` defaults to the computational basis of the outcome space.
pub fn make_measurement_rpc(
    q: Vec<f64>,
    povms: Vec<Povm>,
    basis: Option<Vec<Ket>>,
) -> Result<RandomParameterChannel> {
    let first = povms
        .first()
        .ok_or_else(|| QrpsError::validation("need one POVM per parameter"))?;
    let (din, ny) = (first.dim(), first.len());
    if povms.iter().any(|p| p.dim() != din || p.len() != ny) {
        return Err(QrpsError::dimension(
            "POVMs must share input dimension and outcome alphabet",
        ));
    }
    let basis = match basis {
        Some(b) => {
            if b.len() != ny || b.iter().any(|k| k.dim() != ny) {
                return Err(QrpsError::dimension(format!(
                    "output basis must have {ny} vectors of dim {ny}"
                )));
            }
            for i in 0..ny {
                for j in 0..ny {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    if (b[i].inner(&b[j]).norm() - expect).abs() > STRUCTURAL_TOL {
                        return Err(QrpsError::validation("output basis not orthonormal"));
                    }
                }
            }
            b
        }
        None => (0..ny).map(|y| Ket::basis(ny, y)).collect(),
    };
    let maps = povms
        .iter()
        .map(|p| {
            let mut ops = Vec::with_capacity(ny * din);
            for (y, e) in p.elements().iter().enumerate() {
                let root = psd_sqrt(e)?;
                for j in 0..din {
                    let row: Vec<_> = (0..din).map(|c| root[(j, c)]).collect();
                    ops.push(CMatrix::outer(basis[y].amplitudes(), &conj(&row)));
                }
            }
            KrausChannel::new(ops)
        })
        .collect::<Result<Vec<_>>>()?;
    RandomParameterChannel::with_kind(q, maps, ChannelKind::Measurement { povms, basis })
}

/// Recognizes explicit maps whose outputs are always diagonal in the
/// computational basis and re-tags them as a measurement channel with
/// outcome POVMs Λ^s_y = Σ_k K_k† |y⟩⟨y| K_k.
pub fn measurement_from_maps(
    q: Vec<f64>,
    maps: Vec<KrausChannel>,
) -> Result<RandomParameterChannel> {
    let general = RandomParameterChannel::new(q, maps)?;
    let dout = general.out_dim();
    let mut povms = Vec::with_capacity(general.num_params());
    for (s, m) in general.maps.iter().enumerate() {
        for y in 0..dout {
            for y2 in 0..dout {
                let off = m.apply_adjoint(&CMatrix::outer(
                    Ket::basis(dout, y).amplitudes(),
                    Ket::basis(dout, y2).amplitudes(),
                ));
                if y != y2 && off.frobenius_norm() > STRUCTURAL_TOL {
                    return Err(QrpsError::validation(format!(
                        "map {s} produces coherences between outcomes {y} and {y2}; not a measurement channel"
                    )));
                }
            }
        }
        let els = (0..dout)
            .map(|y| {
                m.apply_adjoint(&Ket::basis(dout, y).projector())
                    .hermitian_part()
            })
            .collect();
        povms.push(Povm::from_elements(els)?);
    }
    make_measurement_rpc(general.q, povms, None)?.with_labels(general.labels)
}

fn conj(v: &[crate::qlinalg::C64]) -> Vec<crate::qlinalg::C64> {
    v.iter().map(|z| z.conj()).collect()
}

/// Computational-basis measurement followed by preparation of σ^s_y.
pub fn make_classical_quantum_rpc(
    q: Vec<f64>,
    prepared: Vec<Vec<DensityOperator>>,
) -> Result<RandomParameterChannel> {
    let first = prepared
        .first()
        .and_then(|v| v.first())
        .ok_or_else(|| QrpsError::validation("need prepared states for every parameter"))?;
    let (din, dout) = (prepared[0].len(), first.dim());
    let maps = prepared
        .iter()
        .map(|states| {
            if states.len() != din || states.iter().any(|s| s.dim() != dout) {
                return Err(QrpsError::dimension("prepared state table is ragged"));
            }
            let mut ops = Vec::new();
            for (y, sigma) in states.iter().enumerate() {
                let eig = crate::qlinalg::eigh(sigma.matrix())?;
                for (k, &l) in eig.values.iter().enumerate() {
                    if l > 1e-14 {
                        let v: Vec<_> = eig.vector(k).iter().map(|z| z * l.sqrt()).collect();
                        ops.push(CMatrix::outer(&v, Ket::basis(din, y).amplitudes()));
                    }
                }
            }
            KrausChannel::new(ops)
        })
        .collect::<Result<Vec<_>>>()?;
    RandomParameterChannel::with_kind(q, maps, ChannelKind::ClassicalQuantum)
}

/// Non-negative cost table d(s, ŝ).
#[derive(Clone, Debug, PartialEq)]
pub struct DistortionFunction {
    s_labels: Vec<String>,
    s_hat_labels: Vec<String>,
    table: Vec<Vec<f64>>,
    d_max: f64,
}

impl DistortionFunction {
    pub fn new(
        s_labels: Vec<String>,
        s_hat_labels: Vec<String>,
        table: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if table.len() != s_labels.len() || table.is_empty() {
            return Err(QrpsError::dimension(format!(
                "distortion table has {} rows for {} parameters",
                table.len(),
                s_labels.len()
            )));
        }
        if s_hat_labels.is_empty() || table.iter().any(|r| r.len() != s_hat_labels.len()) {
            return Err(QrpsError::dimension(
                "distortion table rows must match the estimate alphabet",
            ));
        }
        if table.iter().flatten().any(|&d| !d.is_finite() || d < 0.0) {
            return Err(QrpsError::validation(
                "distortion entries must be finite and non-negative",
            ));
        }
        let d_max = table.iter().flatten().copied().fold(0.0, f64::max);
        Ok(Self {
            s_labels,
            s_hat_labels,
            table,
            d_max,
        })
    }

    /// Square table with unlabeled rows and columns.
    pub fn from_table(table: Vec<Vec<f64>>) -> Result<Self> {
        let ns = table.len();
        let nh = table.first().map_or(0, Vec::len);
        Self::new(
            (0..ns).map(|i| i.to_string()).collect(),
            (0..nh).map(|i| i.to_string()).collect(),
            table,
        )
    }

    pub fn hamming(n: usize) -> Self {
        let table = (0..n)
            .map(|s| (0..n).map(|t| if s == t { 0.0 } else { 1.0 }).collect())
            .collect();
        Self::from_table(table).expect("Hamming table is valid")
    }

    pub fn d(&self, s: usize, s_hat: usize) -> f64 {
        self.table[s][s_hat]
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    pub fn num_s(&self) -> usize {
        self.s_labels.len()
    }

    pub fn num_s_hat(&self) -> usize {
        self.s_hat_labels.len()
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }

    pub fn s_hat_labels(&self) -> &[String] {
        &self.s_hat_labels
    }

    /// Per-letter average over k uses, indices row-major as in
    /// [`RandomParameterChannel::tensor_power`].
    pub fn tensor_power(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(QrpsError::Config(
                "tensor power k must be at least 1".into(),
            ));
        }
        let (ns, nh) = (self.num_s(), self.num_s_hat());
        let tot_s = ns.pow(k as u32);
        let tot_h = nh.pow(k as u32);
        let digits = |mut v: usize, base: usize| -> Vec<usize> {
            let mut d = vec![0; k];
            for slot in d.iter_mut().rev() {
                *slot = v % base;
                v /= base;
            }
            d
        };
        let table = (0..tot_s)
            .map(|s| {
                let sd = digits(s, ns);
                (0..tot_h)
                    .map(|h| {
                        let hd = digits(h, nh);
                        sd.iter()
                            .zip(&hd)
                            .map(|(&a, &b)| self.table[a][b])
                            .sum::<f64>()
                            / k as f64
                    })
                    .collect()
            })
            .collect();
        Self::new(
            (0..tot_s).map(|i| i.to_string()).collect(),
            (0..tot_h).map(|i| i.to_string()).collect(),
            table,
        )
    }

    /// min_ŝ Σ_s w(s) d(s, ŝ): the blind Bayes guess cost.
    pub fn blind_cost(&self, w: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for h in 0..self.num_s_hat() {
            let c: f64 = w
                .iter()
                .enumerate()
                .map(|(s, &p)| p * self.table[s][h])
                .sum();
            if c < best.1 {
                best = (h, c);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::C64;

    fn mixture(rpc: &RandomParameterChannel, rho: &DensityOperator) -> CMatrix {
        let mut m = CMatrix::zeros(rpc.out_dim(), rpc.out_dim());
        for (q, ch) in rpc.q().iter().zip(rpc.maps()) {
            m.add_scaled(*q, ch.apply(rho).unwrap().matrix());
        }
        m
    }

    #[test]
    fn depolarizing_range_enforced() {
        assert!(make_depolarizing_rpc(0.4).is_err());
        assert!(make_depolarizing_rpc(0.375).is_ok());
        assert!(make_dephasing_rpc(1.2).is_err());
    }

    #[test]
    fn measurement_channel_writes_outcomes() {
        let pm = Povm::projective(&[Ket::plus(), Ket::minus()]).unwrap();
        let rpc = make_measurement_rpc(vec![1.0], vec![pm], None).unwrap();
        let out = rpc
            .map(0)
            .apply(&DensityOperator::from_ket(&Ket::basis(2, 0)))
            .unwrap();
        assert!(out.matrix().max_abs_diff(&CMatrix::diag_real(&[0.5, 0.5])) < 1e-12);
    }

    #[test]
    fn measured_dephasing_ignores_phase() {
        let rpc = make_dephasing_rpc(0.3).unwrap();
        let m = rpc.measured(&Povm::computational(2)).unwrap();
        assert!(m.is_measurement());
        let rho = DensityOperator::from_ket(
            &Ket::normalized(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap(),
        );
        for s in 0..2 {
            let out = m.map(s).apply(&rho).unwrap();
            assert!(
                out.matrix()
                    .max_abs_diff(&CMatrix::diag_real(&[0.36, 0.64]))
                    < 1e-12
            );
        }
    }

    #[test]
    fn tensor_power_average_matches_product() {
        let rpc = make_dephasing_rpc(0.2).unwrap();
        let two = rpc.tensor_power(2).unwrap();
        assert_eq!(two.num_params(), 4);
        let rho = DensityOperator::from_ket(&Ket::plus());
        let single = rpc.average_channel().apply(&rho).unwrap();
        let pair = two.average_channel().apply(&rho.tensor(&rho)).unwrap();
        assert!(pair.matrix().max_abs_diff(single.tensor(&single).matrix()) < 1e-12);
        assert!((mixture(&two, &rho.tensor(&rho)).max_abs_diff(pair.matrix())) < 1e-12);
    }

    #[test]
    fn averaged_hamming_tensor_power() {
        let d2 = DistortionFunction::hamming(2).tensor_power(2).unwrap();
        // (0,1) vs (1,1): one mismatch of two
        assert_eq!(d2.d(1, 3), 0.5);
        assert_eq!(d2.d(0, 3), 1.0);
        assert_eq!(d2.d_max(), 1.0);
    }

    #[test]
    fn classical_quantum_channel_prepares() {
        let s0 = vec![
            DensityOperator::from_ket(&Ket::plus()),
            DensityOperator::from_ket(&Ket::minus()),
        ];
        let rpc = make_classical_quantum_rpc(vec![1.0], vec![s0]).unwrap();
        let out = rpc
            .map(0)
            .apply(&DensityOperator::from_ket(&Ket::basis(2, 1)))
            .unwrap();
        assert!(out.matrix().max_abs_diff(&Ket::minus().projector()) < 1e-12);
        assert_eq!(rpc.kind().tag(), "classical-quantum");
    }

    #[test]
    fn blind_cost_picks_majority() {
        let (h, c) = DistortionFunction::hamming(2).blind_cost(&[0.8, 0.2]);
        assert_eq!(h, 0);
        assert!((c - 0.2).abs() < 1e-15);
    }
}

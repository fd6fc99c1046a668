//! Rayleigh channels and the per-stream scalar each scheme's
//! precoder/combiner pair produces.

use nalgebra::{DMatrix, DMatrixView};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use sgmimo_core::MimoScheme;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// `CN(0, 1)` sample.
pub fn cn<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn cn_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    // Column-major fill keeps the draw order independent of nalgebra internals.
    let mut m = CMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            m[(r, c)] = cn(rng);
        }
    }
    m
}

/// Channels of one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    /// Intended channel, `Nr x Nt`.
    pub h_o: CMatrix,
    /// Channels of the other users served by the intended station (SDMA),
    /// `(K - 1) x Nt`.
    pub h_co: CMatrix,
    nr: usize,
    nt: usize,
    k: usize,
    /// Interferer channels, `Nr x Nt` each, column-major and concatenated.
    h_i: Vec<Complex64>,
    /// Each interferer's own served-user channels (SDMA), `K x Nt` each.
    h_tilde: Vec<Complex64>,
}

/// `(Nt, Nr)` as seen by the channel matrices.
fn dims(scheme: &MimoScheme) -> (usize, usize) {
    let (nt, nr) = scheme.antennas();
    (nt as usize, nr as usize)
}

fn users(scheme: &MimoScheme) -> usize {
    match *scheme {
        MimoScheme::Sdma { k, .. } => k as usize,
        MimoScheme::Miso { .. } => 1,
        _ => 0,
    }
}

impl ChannelDraw {
    pub fn sample<R: Rng>(scheme: &MimoScheme, n_interferers: usize, rng: &mut R) -> Self {
        let (nt, nr) = dims(scheme);
        let k = users(scheme);
        let h_o = cn_matrix(nr, nt, rng);
        let h_co = cn_matrix(k.saturating_sub(1), nt, rng);
        let mut h_i = Vec::with_capacity(n_interferers * nr * nt);
        let mut h_tilde = Vec::with_capacity(n_interferers * k * nt);
        for _ in 0..n_interferers {
            h_i.extend((0..nr * nt).map(|_| cn(rng)));
            h_tilde.extend((0..k * nt).map(|_| cn(rng)));
        }
        Self {
            h_o,
            h_co,
            nr,
            nt,
            k,
            h_i,
            h_tilde,
        }
    }

    pub fn interferers(&self) -> usize {
        self.h_i.len().checked_div(self.nr * self.nt).unwrap_or(0)
    }

    fn h_i_slice(&self, i: usize) -> &[Complex64] {
        let n = self.nr * self.nt;
        &self.h_i[i * n..(i + 1) * n]
    }

    /// Channel from interferer `i`, `Nr x Nt`.
    pub fn h_i(&self, i: usize) -> DMatrixView<'_, Complex64> {
        DMatrixView::from_slice(self.h_i_slice(i), self.nr, self.nt)
    }

    /// Served-user channels of interferer `i`, `K x Nt` (SDMA and MISO).
    pub fn h_tilde(&self, i: usize) -> DMatrixView<'_, Complex64> {
        let n = self.k * self.nt;
        DMatrixView::from_slice(&self.h_tilde[i * n..(i + 1) * n], self.k, self.nt)
    }
}

/// Per-stream scalar model `z = a s + sum_i sum_k c_ik x_ik + n` with unit-norm
/// combining (so `n ~ CN(0, N0)`), path loss and power factored out.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamLink {
    pub a: Complex64,
    /// `m_i` coefficients per interferer, interferer-major.
    pub coeffs: Vec<Complex64>,
    pub per_interferer: usize,
}

impl StreamLink {
    /// Intended power gain `|a|^2`.
    pub fn gain(&self) -> f64 {
        self.a.norm_sqr()
    }

    /// Power gain of interferer `i`, `sum_k |c_ik|^2`.
    pub fn interferer_gain(&self, i: usize) -> f64 {
        self.coeffs[i * self.per_interferer..(i + 1) * self.per_interferer]
            .iter()
            .map(|c| c.norm_sqr())
            .sum()
    }

    /// SINR given path losses of the serving and interfering stations and
    /// `N0 / P` (zero for the interference-limited SIR).
    pub fn sinr(&self, serving_loss: f64, interferer_loss: &[f64], noise_to_power: f64) -> f64 {
        let i: f64 = interferer_loss.iter().enumerate().map(|(j, l)| l * self.interferer_gain(j)).sum();
        self.gain() * serving_loss / (i + noise_to_power)
    }
}

fn column(m: &CMatrix, c: usize) -> Vec<Complex64> {
    m.column(c).iter().copied().collect()
}

fn unit(v: &[Complex64]) -> Vec<Complex64> {
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// `w^H v`.
fn dot(w: &[Complex64], v: &[Complex64]) -> Complex64 {
    w.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// `w^H conj(v)`.
fn dot_conj(w: &[Complex64], v: &[Complex64]) -> Complex64 {
    w.iter().zip(v).map(|(a, b)| (a * b).conj()).sum()
}

/// Alamouti effective columns `[h1; conj(h2)]`, `[h2; -conj(h1)]`.
fn alamouti_columns(h: &CMatrix) -> [Vec<Complex64>; 2] {
    let h1 = column(h, 0);
    let h2 = column(h, 1);
    let q1 = h1.iter().copied().chain(h2.iter().map(|x| x.conj())).collect();
    let q2 = h2.iter().copied().chain(h1.iter().map(|x| -x.conj())).collect();
    [q1, q2]
}

fn singular() -> Error {
    Error::Sim("singular channel matrix".into())
}

/// Zero-forcing precoder `U^H (U U^H)^-1` with unit-norm columns.
pub fn zf_precoder(u: &DMatrixView<'_, Complex64>) -> Result<CMatrix> {
    let gram = u * u.adjoint();
    let inv = gram.try_inverse().ok_or_else(singular)?;
    let mut v = u.adjoint() * inv;
    for mut c in v.column_iter_mut() {
        let n = c.norm();
        c /= Complex64::new(n, 0.0);
    }
    Ok(v)
}

/// The stacked `K x Nt` matrix of all users served by the intended station,
/// the typical user first.
fn served_users(ch: &ChannelDraw) -> CMatrix {
    let nt = ch.h_o.ncols();
    let k = 1 + ch.h_co.nrows();
    CMatrix::from_fn(k, nt, |r, c| if r == 0 { ch.h_o[(0, c)] } else { ch.h_co[(r - 1, c)] })
}

/// Coefficients `w^H h_ik` of every interferer's transmit antennas.
fn combine_columns(w: &[Complex64], ch: &ChannelDraw) -> Vec<Complex64> {
    let nr = ch.nr;
    let mut coeffs = Vec::with_capacity(ch.interferers() * ch.nt);
    for i in 0..ch.interferers() {
        for col in ch.h_i_slice(i).chunks_exact(nr) {
            coeffs.push(dot(w, col));
        }
    }
    coeffs
}

/// Builds the scalar model of `stream` for the scheme's receiver. SM-MIMO
/// uses the matched-filter projection onto its stream's channel column.
pub fn stream_link(scheme: &MimoScheme, ch: &ChannelDraw, stream: usize) -> Result<StreamLink> {
    let streams = scheme.gamma_params()?.streams as usize;
    if stream >= streams {
        return Err(Error::Sim(format!("stream {stream} out of range for {scheme}")));
    }
    match *scheme {
        MimoScheme::Siso | MimoScheme::Simo { .. } | MimoScheme::SmMimo { .. } => {
            let w = unit(&column(&ch.h_o, stream));
            let a = dot(&w, &column(&ch.h_o, stream));
            Ok(StreamLink {
                a,
                coeffs: combine_columns(&w, ch),
                per_interferer: ch.nt,
            })
        }
        MimoScheme::Ostbc { nt: 2, ns: 2, t: 2, .. } => {
            let q = alamouti_columns(&ch.h_o);
            let w = unit(&q[stream]);
            let a = dot(&w, &q[stream]);
            let nr = ch.nr;
            let (top, bottom) = w.split_at(nr);
            let mut coeffs = Vec::with_capacity(2 * ch.interferers());
            for i in 0..ch.interferers() {
                let (h1, h2) = ch.h_i_slice(i).split_at(nr);
                coeffs.push(dot(top, h1) + dot_conj(bottom, h2));
                coeffs.push(dot(top, h2) - dot_conj(bottom, h1));
            }
            Ok(StreamLink { a, coeffs, per_interferer: 2 })
        }
        MimoScheme::Ostbc { .. } => Err(Error::Sim(format!("only the 2x2 Alamouti code is simulated, got {scheme}"))),
        MimoScheme::ZfRx { .. } => {
            let h = &ch.h_o;
            let gram = (h.adjoint() * h).try_inverse().ok_or_else(singular)?;
            let pinv = gram * h.adjoint();
            let row: Vec<Complex64> = pinv.row(stream).iter().map(|x| x.conj()).collect();
            let w = unit(&row);
            let a = dot(&w, &column(h, stream));
            Ok(StreamLink {
                a,
                coeffs: combine_columns(&w, ch),
                per_interferer: ch.nt,
            })
        }
        MimoScheme::Sdma { .. } | MimoScheme::Miso { .. } => {
            let users = served_users(ch);
            let v = zf_precoder(&users.as_view())?;
            let a_raw = (ch.h_o.row(0) * v.column(stream))[(0, 0)];
            // Single receive antenna: the combiner only removes the phase.
            let phase = (a_raw / a_raw.norm()).conj();
            let k = v.ncols();
            let mut coeffs = Vec::with_capacity(ch.interferers() * k);
            for i in 0..ch.interferers() {
                let hi = ch.h_i_slice(i);
                if k == 1 {
                    // Maximum-ratio transmission towards the interferer's own user.
                    let ht = ch.h_tilde(i);
                    let n = ht.norm();
                    coeffs.push(phase * ht.iter().zip(hi).map(|(t, h)| h * t.conj()).sum::<Complex64>() / n);
                } else {
                    let vi = zf_precoder(&ch.h_tilde(i))?;
                    for c in vi.column_iter() {
                        coeffs.push(phase * c.iter().zip(hi).map(|(v, h)| h * v).sum::<Complex64>());
                    }
                }
            }
            Ok(StreamLink {
                a: Complex64::new(a_raw.norm(), 0.0),
                coeffs,
                per_interferer: k,
            })
        }
    }
}

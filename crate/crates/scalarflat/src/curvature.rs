//! Curvature of a four-dimensional Riemannian metric.
//!
//! Conventions:
//! * `Rm_{ijkl} = g(R(e_i, e_j) e_k, e_l)` with
//!   `R(X, Y) = [nabla_X, nabla_Y] - nabla_{[X,Y]}`, so the sectional
//!   curvature of an orthonormal plane is `sec(e_i, e_j) = Rm_{ijji}`.
//! * `Ric_{il} = g^{jk} Rm_{ijkl}`; on the round sphere both are positive.
//! * The curvature operator on two-forms carries the extra index reversal
//!   that makes it positive on the round sphere; in the pair basis used
//!   below its matrix is the negative of the naive component matrix.
//! * Tensor norms are full contractions: `|T|^2 = T_{ijkl} T^{ijkl}`, which
//!   for a two-form means `|w|^2 = w_{ij} w^{ij}` (so a Kähler form has
//!   `|w|^2 = 4`).

use crate::chart::{Chart, Point};
use crate::error::{Error, Result};
use crate::fields::{MatrixField, MatrixJet};
use crate::linalg::{inv_spd, Mat4};

/// Differentiation route for curvature quantities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DiffMode {
    /// Exact coordinate derivatives carried by jets.
    Analytic,
    /// Nested central differences with the given relative step.
    Fd { step: f64 },
}

impl DiffMode {
    pub fn fd_default() -> Self {
        DiffMode::Fd { step: 1e-4 }
    }
}

/// Index pairs spanning the space of two-forms, in lexicographic order.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Self-dual basis in pair coordinates (columns), for the orientation in
/// which `e0 ^ e1 ^ e2 ^ e3` is positive.
const U_PLUS: [[f64; 6]; 3] = [
    [1.0, 0.0, 0.0, 0.0, 0.0, 1.0],
    [0.0, 1.0, 0.0, 0.0, -1.0, 0.0],
    [0.0, 0.0, 1.0, 1.0, 0.0, 0.0],
];

/// Anti-self-dual basis in pair coordinates (columns).
const U_MINUS: [[f64; 6]; 3] = [
    [1.0, 0.0, 0.0, 0.0, 0.0, -1.0],
    [0.0, 1.0, 0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0, -1.0, 0.0, 0.0],
];

const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// First and second metric derivatives by nested central differences
/// (the independent route used to cross-check the jet path).
pub fn metric_jet_fd(
    metric: &MatrixField,
    p: &Point,
    chart: &Chart,
    step: f64,
) -> Result<MatrixJet> {
    let value = metric.value(p);
    let mut d1 = [[[0.0; 4]; 4]; 4];
    let mut d2 = [[[[0.0; 4]; 4]; 4]; 4];

    let h = |i: usize, q: &Point| step * q.coords[i].abs().max(1.0);
    for k in 0..4 {
        let hk = h(k, p);
        if chart.margin(&p.coords, k) < 4.0 * hk {
            return Err(Error::StencilLeavesChart { step: hk });
        }
    }

    let first = |q: &Point, k: usize| -> [[f64; 4]; 4] {
        let hk = h(k, q);
        let g1p = metric.value(&q.shifted(k, hk));
        let g1m = metric.value(&q.shifted(k, -hk));
        let g2p = metric.value(&q.shifted(k, 2.0 * hk));
        let g2m = metric.value(&q.shifted(k, -2.0 * hk));
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] =
                    (8.0 * (g1p[i][j] - g1m[i][j]) - (g2p[i][j] - g2m[i][j])) / (12.0 * h(k, q));
            }
        }
        out
    };

    for k in 0..4 {
        d1[k] = first(p, k);
    }
    for k in 0..4 {
        for l in 0..4 {
            let hl = h(l, p);
            let f1p = first(&p.shifted(l, hl), k);
            let f1m = first(&p.shifted(l, -hl), k);
            let f2p = first(&p.shifted(l, 2.0 * hl), k);
            let f2m = first(&p.shifted(l, -2.0 * hl), k);
            for i in 0..4 {
                for j in 0..4 {
                    d2[k][l][i][j] =
                        (8.0 * (f1p[i][j] - f1m[i][j]) - (f2p[i][j] - f2m[i][j])) / (12.0 * hl);
                }
            }
        }
    }
    Ok(MatrixJet { value, d1, d2 })
}

fn metric_jet(metric: &MatrixField, p: &Point, chart: &Chart, mode: DiffMode) -> Result<MatrixJet> {
    match mode {
        DiffMode::Analytic => Ok(metric.jet(p)),
        DiffMode::Fd { step } => metric_jet_fd(metric, p, chart, step),
    }
}

/// Christoffel symbols `Gamma^l_{ij}` (symmetric in `i, j`).
pub fn christoffel(
    metric: &MatrixField,
    p: &Point,
    chart: &Chart,
    mode: DiffMode,
) -> Result<[[[f64; 4]; 4]; 4]> {
    let jet = metric_jet(metric, p, chart, mode)?;
    let (ginv, _) = inv_spd(&jet.value)?;
    Ok(christoffel_from_jet(&jet, &ginv))
}

/// `gamma[l][i][j] = Gamma^l_{ij}`.
fn christoffel_from_jet(jet: &MatrixJet, ginv: &Mat4) -> [[[f64; 4]; 4]; 4] {
    let mut gamma = [[[0.0; 4]; 4]; 4];
    for l in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = 0.0;
                for m in 0..4 {
                    acc += ginv[l][m] * (jet.d1[i][m][j] + jet.d1[j][m][i] - jet.d1[m][i][j]);
                }
                gamma[l][i][j] = 0.5 * acc;
            }
        }
    }
    gamma
}

/// `dgamma[k][l][i][j] = d_k Gamma^l_{ij}`.
fn christoffel_derivative(jet: &MatrixJet, ginv: &Mat4) -> [[[[f64; 4]; 4]; 4]; 4] {
    // d_k g^{lm} = -g^{la} (d_k g_{ab}) g^{bm}
    let mut dginv = [[[0.0; 4]; 4]; 4];
    for k in 0..4 {
        for l in 0..4 {
            for m in 0..4 {
                let mut acc = 0.0;
                for a in 0..4 {
                    for b in 0..4 {
                        acc -= ginv[l][a] * jet.d1[k][a][b] * ginv[b][m];
                    }
                }
                dginv[k][l][m] = acc;
            }
        }
    }
    let mut dgamma = [[[[0.0; 4]; 4]; 4]; 4];
    for k in 0..4 {
        for l in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    let mut acc = 0.0;
                    for m in 0..4 {
                        acc +=
                            dginv[k][l][m] * (jet.d1[i][m][j] + jet.d1[j][m][i] - jet.d1[m][i][j]);
                        acc += ginv[l][m]
                            * (jet.d2[k][i][m][j] + jet.d2[k][j][m][i] - jet.d2[k][m][i][j]);
                    }
                    dgamma[k][l][i][j] = 0.5 * acc;
                }
            }
        }
    }
    dgamma
}

/// Pointwise curvature package.
#[derive(Clone, Debug)]
pub struct CurvatureData {
    /// Fully lowered tensor `Rm_{ijkl}`.
    pub riemann: Box<[[[[f64; 4]; 4]; 4]; 4]>,
    pub ricci: Mat4,
    pub scalar: f64,
    /// `|Ric|^2 = Ric_{ij} Ric^{ij}`.
    pub ricci_norm_sq: f64,
    /// Norm squared of the traceless Ricci part.
    pub ricci_traceless_norm_sq: f64,
    /// `|Rm|^2`, full contraction.
    pub rm_norm_sq: f64,
    pub weyl_plus_norm_sq: f64,
    pub weyl_minus_norm_sq: f64,
    /// Blocks of the curvature operator restricted to the (anti-)self-dual
    /// two-forms, in the orthonormal bases above (operator convention).
    pub block_pp: [[f64; 3]; 3],
    pub block_pm: [[f64; 3]; 3],
    pub block_mp: [[f64; 3]; 3],
    pub block_mm: [[f64; 3]; 3],
    /// Orthonormal frame used for the blocks: `frame[a][i]` is the `i`-th
    /// coordinate component of the frame vector `E_a`. The frame is
    /// oriented positively for the given chart orientation.
    pub frame: [[f64; 4]; 4],
    /// Full 6x6 curvature operator matrix in the pair basis of the frame.
    pub operator: [[f64; 6]; 6],
}

impl CurvatureData {
    /// Residual of the dimension-four norm decomposition
    /// `|Rm|^2 = s^2/6 + 2 |Ric0|^2 + |W+|^2 + |W-|^2`.
    pub fn decomposition_residual(&self) -> f64 {
        let rhs = self.scalar * self.scalar / 6.0
            + 2.0 * self.ricci_traceless_norm_sq
            + self.weyl_plus_norm_sq
            + self.weyl_minus_norm_sq;
        (self.rm_norm_sq - rhs).abs() / self.rm_norm_sq.abs().max(1.0)
    }

    /// Residual (max abs entry) of reassembling the four blocks into the
    /// full 6x6 operator.
    pub fn block_reassembly_residual(&self) -> f64 {
        let mut rebuilt = [[0.0; 6]; 6];
        let add = |rebuilt: &mut [[f64; 6]; 6],
                   left: &[[f64; 6]; 3],
                   block: &[[f64; 3]; 3],
                   right: &[[f64; 6]; 3]| {
            for a in 0..3 {
                for b in 0..3 {
                    for i in 0..6 {
                        for j in 0..6 {
                            rebuilt[i][j] +=
                                left[a][i] * INV_SQRT2 * block[a][b] * right[b][j] * INV_SQRT2;
                        }
                    }
                }
            }
        };
        add(&mut rebuilt, &U_PLUS, &self.block_pp, &U_PLUS);
        add(&mut rebuilt, &U_PLUS, &self.block_pm, &U_MINUS);
        add(&mut rebuilt, &U_MINUS, &self.block_mp, &U_PLUS);
        add(&mut rebuilt, &U_MINUS, &self.block_mm, &U_MINUS);
        let mut worst: f64 = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                worst = worst.max((rebuilt[i][j] - self.operator[i][j]).abs());
            }
        }
        worst
    }

    /// Max violation of the pair symmetry `Rm_{ijkl} = Rm_{klij}` and the
    /// first Bianchi identity.
    pub fn symmetry_residual(&self) -> f64 {
        let rm = &self.riemann;
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        worst = worst.max((rm[i][j][k][l] - rm[k][l][i][j]).abs());
                        worst = worst.max((rm[i][j][k][l] + rm[j][i][k][l]).abs());
                        let bianchi = rm[i][j][k][l] + rm[j][k][i][l] + rm[k][i][j][l];
                        worst = worst.max(bianchi.abs());
                    }
                }
            }
        }
        worst
    }
}

/// Orthonormal frame by Gram-Schmidt on the coordinate basis, oriented so
/// that `det(frame) * chart_orientation > 0`.
pub fn orthonormal_frame(g: &Mat4, chart_orientation: f64) -> [[f64; 4]; 4] {
    let mut frame = [[0.0; 4]; 4];
    for a in 0..4 {
        let mut v = [0.0; 4];
        v[a] = 1.0;
        for b in 0..a {
            let proj = crate::linalg::bilinear(g, &v, &frame[b]);
            for i in 0..4 {
                v[i] -= proj * frame[b][i];
            }
        }
        let norm = crate::linalg::bilinear(g, &v, &v).sqrt();
        for i in 0..4 {
            frame[a][i] = v[i] / norm;
        }
    }
    // det of the frame matrix (frame vectors as rows)
    let det = nalgebra::Matrix4::from_fn(|i, j| frame[i][j]).determinant();
    if det * chart_orientation < 0.0 {
        for i in 0..4 {
            frame[3][i] = -frame[3][i];
        }
    }
    frame
}

/// Full curvature package at a point. `orientation` is the sign relating
/// the coordinate order to the volume form fixed by the Kähler structure.
pub fn curvature_at(
    metric: &MatrixField,
    p: &Point,
    chart: &Chart,
    orientation: f64,
    mode: DiffMode,
) -> Result<CurvatureData> {
    let jet = metric_jet(metric, p, chart, mode)?;
    let g = jet.value;
    let (ginv, _) = inv_spd(&g)?;
    let gamma = christoffel_from_jet(&jet, &ginv);
    let dgamma = christoffel_derivative(&jet, &ginv);

    // R^l_{kij} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
    //           + Gamma^l_{im} Gamma^m_{jk} - Gamma^l_{jm} Gamma^m_{ik}
    let mut riemann = Box::new([[[[0.0; 4]; 4]; 4]; 4]);
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                let mut upper = [0.0; 4];
                for (l, u) in upper.iter_mut().enumerate() {
                    let mut acc = dgamma[i][l][j][k] - dgamma[j][l][i][k];
                    for m in 0..4 {
                        acc += gamma[l][i][m] * gamma[m][j][k] - gamma[l][j][m] * gamma[m][i][k];
                    }
                    *u = acc;
                }
                for l in 0..4 {
                    let mut lowered = 0.0;
                    for (m, u) in upper.iter().enumerate() {
                        lowered += g[l][m] * u;
                    }
                    riemann[i][j][k][l] = lowered;
                }
            }
        }
    }

    // Ricci and scalar.
    let mut ricci = [[0.0; 4]; 4];
    for i in 0..4 {
        for l in 0..4 {
            let mut acc = 0.0;
            for j in 0..4 {
                for k in 0..4 {
                    acc += ginv[j][k] * riemann[i][j][k][l];
                }
            }
            ricci[i][l] = acc;
        }
    }
    let mut scalar = 0.0;
    for i in 0..4 {
        for l in 0..4 {
            scalar += ginv[i][l] * ricci[i][l];
        }
    }
    let mut ricci_norm_sq = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    ricci_norm_sq += ricci[i][j] * ricci[k][l] * ginv[i][k] * ginv[j][l];
                }
            }
        }
    }
    let ricci_traceless_norm_sq = ricci_norm_sq - scalar * scalar / 4.0;

    // Express Rm in an oriented orthonormal frame and build the operator.
    let frame = orthonormal_frame(&g, orientation);
    let mut bilinear6 = [[0.0; 6]; 6];
    for (pi, &(a, b)) in PAIRS.iter().enumerate() {
        for (pj, &(c, d)) in PAIRS.iter().enumerate() {
            let mut acc = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        for l in 0..4 {
                            acc += riemann[i][j][k][l]
                                * frame[a][i]
                                * frame[b][j]
                                * frame[c][k]
                                * frame[d][l];
                        }
                    }
                }
            }
            bilinear6[pi][pj] = acc;
        }
    }
    // Operator convention (positive on the round sphere).
    let mut operator = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            operator[i][j] = -bilinear6[i][j];
        }
    }
    let rm_norm_sq = {
        let mut acc = 0.0;
        for row in &bilinear6 {
            for x in row {
                acc += x * x;
            }
        }
        4.0 * acc
    };

    let project = |left: &[[f64; 6]; 3], right: &[[f64; 6]; 3]| -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                let mut acc = 0.0;
                for i in 0..6 {
                    for j in 0..6 {
                        acc += left[a][i] * INV_SQRT2 * operator[i][j] * right[b][j] * INV_SQRT2;
                    }
                }
                out[a][b] = acc;
            }
        }
        out
    };
    let block_pp = project(&U_PLUS, &U_PLUS);
    let block_pm = project(&U_PLUS, &U_MINUS);
    let block_mp = project(&U_MINUS, &U_PLUS);
    let block_mm = project(&U_MINUS, &U_MINUS);

    let weyl_norm = |block: &[[f64; 3]; 3]| -> f64 {
        let mut acc = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let w = block[a][b] - if a == b { scalar / 12.0 } else { 0.0 };
                acc += w * w;
            }
        }
        4.0 * acc
    };
    let weyl_plus_norm_sq = weyl_norm(&block_pp);
    let weyl_minus_norm_sq = weyl_norm(&block_mm);

    Ok(CurvatureData {
        riemann,
        ricci,
        scalar,
        ricci_norm_sq,
        ricci_traceless_norm_sq,
        rm_norm_sq,
        weyl_plus_norm_sq,
        weyl_minus_norm_sq,
        block_pp,
        block_pm,
        block_mp,
        block_mm,
        frame,
        operator,
    })
}

/// Residuals of the Kähler curvature identities at a point:
/// the self-dual block must equal `(s/4)` times the projection onto the
/// Kähler form, which forces `|Rm^{++}|^2 = s^2/4`.
#[derive(Clone, Copy, Debug)]
pub struct KahlerCurvatureResiduals {
    /// Tensor norm of `Rm^{++} - (s/4) (w/|w|) tensor (w/|w|)` where `w` is
    /// the Kähler form viewed inside the self-dual space.
    pub block_residual: f64,
    /// `| |Rm^{++}|^2 - s^2/4 |`.
    pub norm_residual: f64,
    /// How far the Kähler form is from being self-dual (diagnoses a wrong
    /// orientation immediately).
    pub omega_antiselfdual_part: f64,
}

pub fn kahler_curvature_checks(
    data: &CurvatureData,
    g: &Mat4,
    j_matrix: &Mat4,
) -> KahlerCurvatureResiduals {
    // Kähler form in the orthonormal frame: w_{ab} = g(J E_a, E_b).
    let frame = &data.frame;
    let mut omega_pairs = [0.0; 6];
    for (pi, &(a, b)) in PAIRS.iter().enumerate() {
        let mut jea = [0.0; 4];
        for i in 0..4 {
            for k in 0..4 {
                // J E_a has components (J E_a)^i = J^i_k E_a^k
                jea[i] += j_matrix[i][k] * frame[a][k];
            }
        }
        omega_pairs[pi] = crate::linalg::bilinear(g, &jea, &frame[b]);
    }
    // Coordinates of omega in the self-dual / anti-self-dual bases.
    let mut w_plus = [0.0; 3];
    let mut w_minus = [0.0; 3];
    for a in 0..3 {
        for i in 0..6 {
            w_plus[a] += U_PLUS[a][i] * INV_SQRT2 * omega_pairs[i];
            w_minus[a] += U_MINUS[a][i] * INV_SQRT2 * omega_pairs[i];
        }
    }
    let omega_antiselfdual_part = w_minus.iter().map(|x| x * x).sum::<f64>().sqrt();

    // Expected block: (s/8) w_plus w_plus^T in these coordinates (w_plus has
    // Euclidean length sqrt(2)).
    let s = data.scalar;
    let mut residual_sq = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            let d = data.block_pp[a][b] - (s / 8.0) * w_plus[a] * w_plus[b];
            residual_sq += d * d;
        }
    }
    let block_residual = 2.0 * residual_sq.sqrt();

    let mut pp_norm_sq = 0.0;
    for row in &data.block_pp {
        for x in row {
            pp_norm_sq += x * x;
        }
    }
    pp_norm_sq *= 4.0;
    let norm_residual = (pp_norm_sq - s * s / 4.0).abs();

    KahlerCurvatureResiduals {
        block_residual,
        norm_residual,
        omega_antiselfdual_part,
    }
}

//! Field evaluators.
//!
//! A field is written once as a map generic over [`Real`] and then wrapped
//! in a dynamic handle that exposes two concrete entry points: plain `f64`
//! evaluation and jet evaluation (which carries exact first and second
//! coordinate derivatives). The wrapping keeps the geometry structs object
//! safe while every family still defines its data a single time.

use std::sync::Arc;

use crate::chart::Point;
use crate::jet::{Jet, Real};

/// A scalar function of the chart coordinates.
pub trait ScalarMap: Send + Sync + 'static {
    fn eval<T: Real>(&self, x: [T; 4]) -> T;
}

/// A vector field, components in the coordinate basis.
pub trait VectorMap: Send + Sync + 'static {
    fn eval<T: Real>(&self, x: [T; 4]) -> [T; 4];
}

/// A matrix-valued field (metric, complex structure, ...).
pub trait MatrixMap: Send + Sync + 'static {
    fn eval<T: Real>(&self, x: [T; 4]) -> [[T; 4]; 4];
}

/// A parametrised surface inside the chart: two parameters to four
/// coordinates. Used for level-set reduction charts.
pub trait EmbedMap: Send + Sync + 'static {
    fn eval<T: Real>(&self, s: [T; 2]) -> [T; 4];
}

trait DynScalar: Send + Sync {
    fn at(&self, x: &[f64; 4]) -> f64;
    fn jet_at(&self, x: [Jet; 4]) -> Jet;
}

trait DynVector: Send + Sync {
    fn at(&self, x: &[f64; 4]) -> [f64; 4];
    fn jet_at(&self, x: [Jet; 4]) -> [Jet; 4];
}

trait DynMatrix: Send + Sync {
    fn at(&self, x: &[f64; 4]) -> [[f64; 4]; 4];
    fn jet_at(&self, x: [Jet; 4]) -> [[Jet; 4]; 4];
}

trait DynEmbed: Send + Sync {
    fn at(&self, s: [f64; 2]) -> [f64; 4];
    fn jet_at(&self, s: [Jet; 2]) -> [Jet; 4];
}

impl<M: ScalarMap> DynScalar for M {
    fn at(&self, x: &[f64; 4]) -> f64 {
        self.eval(*x)
    }
    fn jet_at(&self, x: [Jet; 4]) -> Jet {
        self.eval(x)
    }
}

impl<M: VectorMap> DynVector for M {
    fn at(&self, x: &[f64; 4]) -> [f64; 4] {
        self.eval(*x)
    }
    fn jet_at(&self, x: [Jet; 4]) -> [Jet; 4] {
        self.eval(x)
    }
}

impl<M: MatrixMap> DynMatrix for M {
    fn at(&self, x: &[f64; 4]) -> [[f64; 4]; 4] {
        self.eval(*x)
    }
    fn jet_at(&self, x: [Jet; 4]) -> [[Jet; 4]; 4] {
        self.eval(x)
    }
}

impl<M: EmbedMap> DynEmbed for M {
    fn at(&self, s: [f64; 2]) -> [f64; 4] {
        self.eval(s)
    }
    fn jet_at(&self, s: [Jet; 2]) -> [Jet; 4] {
        self.eval(s)
    }
}

/// Value, gradient and Hessian of a scalar field with respect to the chart
/// coordinates (coordinate partials, not covariant derivatives).
#[derive(Clone, Copy, Debug)]
pub struct ScalarJet {
    pub value: f64,
    pub grad: [f64; 4],
    pub hess: [[f64; 4]; 4],
}

#[derive(Clone)]
pub struct ScalarField(Arc<dyn DynScalar>);

impl ScalarField {
    pub fn new(map: impl ScalarMap) -> Self {
        ScalarField(Arc::new(map))
    }

    pub fn value(&self, p: &Point) -> f64 {
        self.0.at(&p.coords)
    }

    pub fn jet(&self, p: &Point) -> ScalarJet {
        let j = self.0.jet_at(Jet::seed(&p.coords));
        ScalarJet {
            value: j.v,
            grad: j.g,
            hess: j.h,
        }
    }

    /// Jet evaluation with caller-provided seeds, for composing fields.
    pub fn raw_jet(&self, x: [Jet; 4]) -> Jet {
        self.0.jet_at(x)
    }
}

#[derive(Clone)]
pub struct VectorField(Arc<dyn DynVector>);

/// Value and coordinate partials of a vector field:
/// `partial[k][i] = d V^i / d x^k`.
#[derive(Clone, Copy, Debug)]
pub struct VectorJet {
    pub value: [f64; 4],
    pub partial: [[f64; 4]; 4],
}

impl VectorField {
    pub fn new(map: impl VectorMap) -> Self {
        VectorField(Arc::new(map))
    }

    pub fn value(&self, p: &Point) -> [f64; 4] {
        self.0.at(&p.coords)
    }

    pub fn jet(&self, p: &Point) -> VectorJet {
        let j = self.0.jet_at(Jet::seed(&p.coords));
        let mut out = VectorJet {
            value: [0.0; 4],
            partial: [[0.0; 4]; 4],
        };
        for i in 0..4 {
            out.value[i] = j[i].v;
            for k in 0..4 {
                out.partial[k][i] = j[i].g[k];
            }
        }
        out
    }

    pub fn raw_jet(&self, x: [Jet; 4]) -> [Jet; 4] {
        self.0.jet_at(x)
    }
}

/// Value and first two coordinate derivatives of a matrix field:
/// `d1[k][i][j] = d m_ij / d x^k`, `d2[k][l][i][j] = d^2 m_ij / dx^k dx^l`.
#[derive(Clone, Debug)]
pub struct MatrixJet {
    pub value: [[f64; 4]; 4],
    pub d1: [[[f64; 4]; 4]; 4],
    pub d2: [[[[f64; 4]; 4]; 4]; 4],
}

#[derive(Clone)]
pub struct MatrixField(Arc<dyn DynMatrix>);

impl MatrixField {
    pub fn new(map: impl MatrixMap) -> Self {
        MatrixField(Arc::new(map))
    }

    pub fn value(&self, p: &Point) -> [[f64; 4]; 4] {
        self.0.at(&p.coords)
    }

    pub fn jet(&self, p: &Point) -> MatrixJet {
        let j = self.0.jet_at(Jet::seed(&p.coords));
        let mut out = MatrixJet {
            value: [[0.0; 4]; 4],
            d1: [[[0.0; 4]; 4]; 4],
            d2: [[[[0.0; 4]; 4]; 4]; 4],
        };
        for i in 0..4 {
            for jj in 0..4 {
                out.value[i][jj] = j[i][jj].v;
                for k in 0..4 {
                    out.d1[k][i][jj] = j[i][jj].g[k];
                    for l in 0..4 {
                        out.d2[k][l][i][jj] = j[i][jj].h[k][l];
                    }
                }
            }
        }
        out
    }

    pub fn raw_jet(&self, x: [Jet; 4]) -> [[Jet; 4]; 4] {
        self.0.jet_at(x)
    }
}

/// Dynamic handle to an [`EmbedMap`].
#[derive(Clone)]
pub struct EmbedField(Arc<dyn DynEmbed>);

impl EmbedField {
    pub fn new(map: impl EmbedMap) -> Self {
        EmbedField(Arc::new(map))
    }

    pub fn value(&self, s: [f64; 2]) -> [f64; 4] {
        self.0.at(s)
    }

    /// Coordinates as jets in the two surface parameters (seeded in the
    /// first two jet slots), carrying the exact jacobian and second
    /// derivatives of the embedding.
    pub fn raw_jet(&self, s: [f64; 2]) -> [Jet; 4] {
        self.0
            .jet_at([Jet::variable(s[0], 0), Jet::variable(s[1], 1)])
    }

    /// Jacobian `d coords / d s_a`, `jac[a][i]`.
    pub fn jacobian(&self, s: [f64; 2]) -> [[f64; 4]; 2] {
        let j = self.raw_jet(s);
        let mut out = [[0.0; 4]; 2];
        for a in 0..2 {
            for i in 0..4 {
                out[a][i] = j[i].g[a];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{Chart, Point};

    struct Paraboloid;

    impl ScalarMap for Paraboloid {
        fn eval<T: Real>(&self, x: [T; 4]) -> T {
            // x0^2 - 2 x1 x2 + exp(x3)
            x[0] * x[0] - T::constant(2.0) * x[1] * x[2] + x[3].exp()
        }
    }

    #[test]
    fn scalar_jet_partials() {
        let chart = Chart::unbounded("test");
        let p = Point::new(chart.id, [1.0, 2.0, -0.5, 0.25]);
        let f = ScalarField::new(Paraboloid);
        let j = f.jet(&p);
        assert!((j.value - (1.0 + 2.0 + 0.25f64.exp())).abs() < 1e-14);
        assert!((j.grad[0] - 2.0).abs() < 1e-14);
        assert!((j.grad[1] + 2.0 * -0.5).abs() < 1e-13);
        assert!((j.hess[1][2] + 2.0).abs() < 1e-14);
        assert!((j.hess[3][3] - 0.25f64.exp()).abs() < 1e-13);
    }
}

//! Families indexed by `eps in [0, eps_max]`, stored at Chebyshev points of the second
//! kind and evaluated by barycentric interpolation.

use std::borrow::Cow;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{closedness_defect, omega_flat, ScalarField, VectorField};
use crate::space::TorusBox;

pub const DEFAULT_SAMPLES: usize = 17;

/// Closedness tolerance behind the symplectic flag.
pub const SYMPLECTIC_TOL: f64 = 1e-8;

const TIME_SLACK: f64 = 1e-12;

/// Values that can be interpolated linearly.
pub trait Combine: Clone + Send + Sync {
    fn combine(terms: &[(f64, &Self)]) -> Self;
}

impl Combine for ScalarField {
    fn combine(terms: &[(f64, &Self)]) -> Self {
        ScalarField::linear_combination(terms[0].1.space(), terms)
    }
}

impl Combine for VectorField {
    fn combine(terms: &[(f64, &Self)]) -> Self {
        VectorField::linear_combination(terms[0].1.space(), terms)
    }
}

/// `eps_max (1 - cos(pi i / (n - 1))) / 2`, increasing from `0` to `eps_max`.
pub fn chebyshev_nodes(eps_max: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i == 0 {
                0.0
            } else if i == n - 1 {
                eps_max
            } else if 2 * i == n - 1 {
                0.5 * eps_max
            } else {
                0.5 * eps_max * (1.0 - (std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
            }
        })
        .collect()
}

pub(crate) fn check_time(eps: f64, eps_max: f64) -> Result<f64> {
    let slack = TIME_SLACK * eps_max.max(1.0);
    if !(eps >= -slack && eps <= eps_max + slack) {
        return Err(Error::TimeOutOfRange { eps, eps_max });
    }
    Ok(eps.clamp(0.0, eps_max))
}

#[derive(Debug, Clone)]
pub struct SampledFamily<T> {
    eps_max: f64,
    nodes: Vec<f64>,
    bary: Vec<f64>,
    values: Vec<T>,
}

pub type ScalarFamily = SampledFamily<ScalarField>;

impl<T: Combine> SampledFamily<T> {
    /// Evaluates `f` at `n` Chebyshev nodes (in parallel).
    pub fn sample(eps_max: f64, n: usize, f: impl Fn(f64) -> Result<T> + Sync) -> Result<Self> {
        if !(eps_max > 0.0 && eps_max.is_finite()) {
            return Err(Error::Precondition(format!("eps_max must be positive, got {eps_max}")));
        }
        if n < 2 {
            return Err(Error::Precondition("a family needs at least two samples".into()));
        }
        let nodes = chebyshev_nodes(eps_max, n);
        let values = nodes.par_iter().map(|&e| f(e)).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_parts(eps_max, nodes, values))
    }

    fn from_parts(eps_max: f64, nodes: Vec<f64>, values: Vec<T>) -> Self {
        let n = nodes.len();
        let bary = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                if i == 0 || i == n - 1 {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        Self { eps_max, nodes, bary, values }
    }

    pub fn eps_max(&self) -> f64 {
        self.eps_max
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Interpolation weights at `eps`; a unit vector at the nodes.
    pub fn weights(&self, eps: f64) -> Result<Vec<f64>> {
        let eps = check_time(eps, self.eps_max)?;
        if let Some(i) = self.nodes.iter().position(|&x| x == eps) {
            let mut w = vec![0.0; self.nodes.len()];
            w[i] = 1.0;
            return Ok(w);
        }
        let q: Vec<f64> = self.nodes.iter().zip(&self.bary).map(|(x, b)| b / (eps - x)).collect();
        let total: f64 = q.iter().sum();
        Ok(q.into_iter().map(|v| v / total).collect())
    }

    pub fn at(&self, eps: f64) -> Result<T> {
        let w = self.weights(eps)?;
        if let Some(i) = w.iter().position(|&v| v == 1.0) {
            return Ok(self.values[i].clone());
        }
        let terms: Vec<(f64, &T)> = w.into_iter().zip(&self.values).collect();
        Ok(T::combine(&terms))
    }

    pub fn map<U: Combine>(&self, f: impl Fn(&T) -> U + Sync + Send) -> SampledFamily<U> {
        let values = self.values.par_iter().map(f).collect();
        SampledFamily::<U>::from_parts(self.eps_max, self.nodes.clone(), values)
    }

    /// Like [`Self::map`]; `f` also receives the node.
    pub fn try_map<U: Combine>(&self, f: impl Fn(f64, &T) -> Result<U> + Sync) -> Result<SampledFamily<U>> {
        let values =
            self.nodes.par_iter().zip(&self.values).map(|(&e, v)| f(e, v)).collect::<Result<Vec<_>>>()?;
        Ok(SampledFamily::<U>::from_parts(self.eps_max, self.nodes.clone(), values))
    }
}

#[derive(Debug)]
enum Source {
    Constant(VectorField),
    Sampled(SampledFamily<VectorField>),
}

/// Time-dependent vector field `eps -> X_eps` on `[0, eps_max]`.
#[derive(Debug, Clone)]
pub struct TimeDepVectorField {
    space: TorusBox,
    eps_max: f64,
    symplectic: bool,
    source: Arc<Source>,
}

impl TimeDepVectorField {
    /// Autonomous field. With `symplectic` set, `omega(X)` must be closed.
    pub fn constant(x: VectorField, eps_max: f64, symplectic: bool) -> Result<Self> {
        if !(eps_max > 0.0 && eps_max.is_finite()) {
            return Err(Error::Precondition(format!("eps_max must be positive, got {eps_max}")));
        }
        let out = Self { space: x.space().clone(), eps_max, symplectic, source: Arc::new(Source::Constant(x)) };
        out.verify_flag()?;
        Ok(out)
    }

    pub fn zero(space: &TorusBox, eps_max: f64) -> Result<Self> {
        Self::constant(VectorField::zero(space), eps_max, true)
    }

    /// Samples `provider` at `n` Chebyshev nodes.
    pub fn sampled(
        space: &TorusBox,
        eps_max: f64,
        n: usize,
        symplectic: bool,
        provider: impl Fn(f64) -> Result<VectorField> + Sync,
    ) -> Result<Self> {
        let family = SampledFamily::sample(eps_max, n, |e| {
            let x = provider(e)?;
            if x.space() != space {
                return Err(Error::SpaceMismatch);
            }
            Ok(x)
        })?;
        Self::from_family(family, symplectic)
    }

    pub fn from_family(family: SampledFamily<VectorField>, symplectic: bool) -> Result<Self> {
        let space = family.values()[0].space().clone();
        if family.values().iter().any(|x| x.space() != &space) {
            return Err(Error::SpaceMismatch);
        }
        let out = Self { space, eps_max: family.eps_max(), symplectic, source: Arc::new(Source::Sampled(family)) };
        out.verify_flag()?;
        Ok(out)
    }

    /// Sets the flag only if every sample passes the closedness check.
    pub(crate) fn from_family_checked(family: SampledFamily<VectorField>, claim: bool) -> Result<Self> {
        let mut out = Self::from_family(family, false)?;
        out.symplectic = claim && out.symplectic_defect() < SYMPLECTIC_TOL;
        Ok(out)
    }

    fn verify_flag(&self) -> Result<()> {
        if self.symplectic {
            let defect = self.symplectic_defect();
            if defect >= SYMPLECTIC_TOL {
                return Err(Error::NotSymplectic { defect, tol: SYMPLECTIC_TOL });
            }
        }
        Ok(())
    }

    pub fn space(&self) -> &TorusBox {
        &self.space
    }

    pub fn eps_max(&self) -> f64 {
        self.eps_max
    }

    pub fn is_symplectic(&self) -> bool {
        self.symplectic
    }

    pub fn is_autonomous(&self) -> bool {
        matches!(*self.source, Source::Constant(_))
    }

    /// Sample times of a sampled field; `None` when autonomous.
    pub fn nodes(&self) -> Option<&[f64]> {
        match &*self.source {
            Source::Constant(_) => None,
            Source::Sampled(f) => Some(f.nodes()),
        }
    }

    /// Stored samples (the single field when autonomous).
    pub fn samples(&self) -> Vec<&VectorField> {
        match &*self.source {
            Source::Constant(x) => vec![x],
            Source::Sampled(f) => f.values().iter().collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.samples().iter().all(|x| x.is_zero())
    }

    /// Max closedness defect of `omega(X_eps)` over the stored samples.
    pub fn symplectic_defect(&self) -> f64 {
        self.samples().into_par_iter().map(|x| closedness_defect(&omega_flat(x))).reduce(|| 0.0, f64::max)
    }

    pub fn at(&self, eps: f64) -> Result<VectorField> {
        Ok(self.field_at(eps)?.into_owned())
    }

    pub(crate) fn field_at(&self, eps: f64) -> Result<Cow<'_, VectorField>> {
        match &*self.source {
            Source::Constant(x) => {
                check_time(eps, self.eps_max)?;
                Ok(Cow::Borrowed(x))
            }
            Source::Sampled(f) => Ok(Cow::Owned(f.at(eps)?)),
        }
    }

    /// Applies `f` to every sample. The symplectic flag is kept only if `keeps_flag`.
    pub fn map(&self, keeps_flag: bool, f: impl Fn(&VectorField) -> VectorField + Sync + Send) -> Self {
        let source = match &*self.source {
            Source::Constant(x) => Source::Constant(f(x)),
            Source::Sampled(fam) => Source::Sampled(fam.map(f)),
        };
        let space = match &source {
            Source::Constant(x) => x.space().clone(),
            Source::Sampled(fam) => fam.values()[0].space().clone(),
        };
        Self { space, eps_max: self.eps_max, symplectic: keeps_flag && self.symplectic, source: Arc::new(source) }
    }

    /// `eps -> <X_eps>`; averaging preserves closedness.
    pub fn vertical_average(&self) -> Self {
        self.map(true, VectorField::average)
    }

    /// Times at which derived families are sampled: the stored nodes, or `n` Chebyshev
    /// nodes for autonomous fields.
    pub fn sample_times(&self, n: usize) -> Vec<f64> {
        match self.nodes() {
            Some(nodes) => nodes.to_vec(),
            None => chebyshev_nodes(self.eps_max, n),
        }
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use super::*;

    #[test]
    fn nodes_include_the_endpoints_and_midpoint() {
        let x = chebyshev_nodes(0.5, 17);
        assert_eq!(x[0], 0.0);
        assert_eq!(x[16], 0.5);
        assert_eq!(x[8], 0.25);
        assert!(x.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn interpolation_of_smooth_family() {
        let s = TorusBox::cube(1, 0.0, 1.0, 2, 5).unwrap();
        let fam = SampledFamily::sample(0.5, 17, |e| Ok(ScalarField::constant(&s, (TAU * e).sin()))).unwrap();
        for e in [0.0, 0.1, 0.2345, 0.5] {
            let v = fam.at(e).unwrap().evaluate(&[0.0], &[0.5]).unwrap();
            assert!((v - (TAU * e).sin()).abs() < 1e-13, "{e}");
        }
        assert!(matches!(fam.at(0.6), Err(Error::TimeOutOfRange { .. })));
    }

    #[test]
    fn symplectic_flag_is_verified() {
        let s = TorusBox::cube(1, 0.0, 1.0, 2, 5).unwrap();
        let x = VectorField::new(&s, vec![ScalarField::zero(&s)], vec![ScalarField::from_action_fn(&s, |i| i[0])]).unwrap();
        assert!(matches!(TimeDepVectorField::constant(x.clone(), 1.0, true), Err(Error::NotSymplectic { .. })));
        assert!(!TimeDepVectorField::constant(x, 1.0, false).unwrap().is_symplectic());
    }
}

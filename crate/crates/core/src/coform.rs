//! Cotangent-valued forms: one p-form per frame direction.
//!
//! A `CoForm` stores the values of a covariant-derivative-like object, the
//! component at index a being the p-form for the frame direction e_a.  When
//! slot operators act on such an object, slot 1 is the covariant direction
//! and slots 2..p+1 are the form slots.

use nalgebra::{DMatrix, DVector};

use crate::form::{binomial, Form, Vector};

#[derive(Clone, Debug, PartialEq)]
pub struct CoForm {
    m: usize,
    p: usize,
    comps: Vec<Form>,
}

impl CoForm {
    pub fn zero(m: usize, p: usize) -> Self {
        CoForm { m, p, comps: vec![Form::zero(m, p); m] }
    }

    pub fn from_components(comps: Vec<Form>) -> Self {
        assert!(!comps.is_empty());
        let m = comps[0].dim();
        let p = comps[0].degree();
        assert_eq!(comps.len(), m, "one component per frame direction");
        for c in &comps {
            assert_eq!(c.dim(), m);
            assert_eq!(c.degree(), p);
        }
        CoForm { m, p, comps }
    }

    /// Embed a (p+1)-form c as the co-form with components e_a ⌟ c.
    pub fn from_form(c: &Form) -> Self {
        let m = c.dim();
        assert!(c.degree() >= 1);
        let comps = (0..m).map(|a| c.interior(&Vector::basis(m, a))).collect();
        CoForm { m, p: c.degree() - 1, comps }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn component(&self, a: usize) -> &Form {
        &self.comps[a]
    }

    pub fn component_mut(&mut self, a: usize) -> &mut Form {
        &mut self.comps[a]
    }

    pub fn components(&self) -> &[Form] {
        &self.comps
    }

    /// Value in an arbitrary direction, Σ_a x_a · comps[a].
    pub fn direction(&self, x: &Vector) -> Form {
        assert_eq!(x.dim(), self.m);
        let mut out = Form::zero(self.m, self.p);
        for (a, c) in self.comps.iter().enumerate() {
            if x.coords[a] != 0.0 {
                out.add_scaled_assign(c, x.coords[a]);
            }
        }
        out
    }

    /// Alternation Σ_a e_a ∧ comps[a]; for ∇β this is dβ.
    pub fn alternate(&self) -> Form {
        assert!(self.p < self.m, "alternation of a top-degree co-form");
        let mut out = Form::zero(self.m, self.p + 1);
        for (a, c) in self.comps.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            out += &Form::basis_form(self.m, &[a]).wedge(c);
        }
        out
    }

    /// Frame-sum codifferential −Σ_a e_a ⌟ comps[a]; for ∇β this is d*β.
    pub fn codifferential(&self) -> Form {
        assert!(self.p >= 1, "codifferential needs degree >= 1");
        let mut out = Form::zero(self.m, self.p - 1);
        for (a, c) in self.comps.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            out.add_scaled_assign(&c.interior(&Vector::basis(self.m, a)), -1.0);
        }
        out
    }

    /// Twisted codifferential Σ_a (I e_a) ⌟ comps[a], with no leading minus.
    pub fn codifferential_twisted(&self, i_mat: &DMatrix<f64>) -> Form {
        assert!(self.p >= 1, "codifferential needs degree >= 1");
        assert_eq!(i_mat.nrows(), self.m);
        let mut out = Form::zero(self.m, self.p - 1);
        for (a, c) in self.comps.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let ia = Vector::from_coords(i_mat.column(a).iter().copied().collect());
            out += &c.interior(&ia);
        }
        out
    }

    /// Precompose the direction: component a becomes the value in direction
    /// mat e_a.
    pub fn precompose(&self, mat: &DMatrix<f64>) -> CoForm {
        assert_eq!(mat.nrows(), self.m);
        let comps = (0..self.m)
            .map(|a| {
                let col = Vector::from_coords(mat.column(a).iter().copied().collect());
                self.direction(&col)
            })
            .collect();
        CoForm { m: self.m, p: self.p, comps }
    }

    /// Apply a map to every component.
    pub fn map<F: Fn(&Form) -> Form>(&self, f: F) -> CoForm {
        CoForm::from_components(self.comps.iter().map(f).collect())
    }

    pub fn scaled(&self, s: f64) -> CoForm {
        self.map(|c| c.scaled(s))
    }

    pub fn add_scaled_assign(&mut self, other: &CoForm, s: f64) {
        assert_eq!(self.m, other.m);
        assert_eq!(self.p, other.p);
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            a.add_scaled_assign(b, s);
        }
    }

    /// Inner product Σ_a ⟨comps[a], other[a]⟩.
    pub fn inner(&self, other: &CoForm) -> f64 {
        assert_eq!(self.m, other.m);
        assert_eq!(self.p, other.p);
        self.comps.iter().zip(&other.comps).map(|(a, b)| a.inner(b)).sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    pub fn residual_to(&self, other: &CoForm) -> f64 {
        let diff = (self - other).norm();
        diff / 1f64.max(self.norm()).max(other.norm())
    }

    /// Flatten to a column vector, components concatenated in frame order.
    pub fn to_flat(&self) -> DVector<f64> {
        let block = binomial(self.m, self.p);
        let mut v = DVector::zeros(self.m * block);
        for (a, c) in self.comps.iter().enumerate() {
            for (k, &x) in c.coeffs().iter().enumerate() {
                v[a * block + k] = x;
            }
        }
        v
    }

    pub fn from_flat(m: usize, p: usize, v: &DVector<f64>) -> CoForm {
        let block = binomial(m, p);
        assert_eq!(v.len(), m * block);
        let mut out = CoForm::zero(m, p);
        for a in 0..m {
            for k in 0..block {
                out.comps[a].coeffs_mut()[k] = v[a * block + k];
            }
        }
        out
    }
}

impl std::ops::Add for &CoForm {
    type Output = CoForm;
    fn add(self, other: &CoForm) -> CoForm {
        let mut out = self.clone();
        out.add_scaled_assign(other, 1.0);
        out
    }
}

impl std::ops::Sub for &CoForm {
    type Output = CoForm;
    fn sub(self, other: &CoForm) -> CoForm {
        let mut out = self.clone();
        out.add_scaled_assign(other, -1.0);
        out
    }
}

impl std::ops::Neg for &CoForm {
    type Output = CoForm;
    fn neg(self) -> CoForm {
        self.scaled(-1.0)
    }
}

impl std::ops::AddAssign<&CoForm> for CoForm {
    fn add_assign(&mut self, other: &CoForm) {
        self.add_scaled_assign(other, 1.0);
    }
}

impl std::ops::SubAssign<&CoForm> for CoForm {
    fn sub_assign(&mut self, other: &CoForm) {
        self.add_scaled_assign(other, -1.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embed_and_alternate() {
        // Σ_a e_a ∧ (e_a ⌟ c) = p · c for a p-form c
        let c = Form::basis_form(5, &[0, 2, 4]);
        let emb = CoForm::from_form(&c);
        let back = emb.alternate();
        assert!(back.residual_to(&c.scaled(3.0)) < 1e-14);
    }

    #[test]
    fn codifferential_of_embedding_vanishes() {
        // Σ_a e_a ⌟ (e_a ⌟ c) = 0 by antisymmetry
        let c = Form::basis_form(4, &[0, 1, 3]);
        let emb = CoForm::from_form(&c);
        assert!(emb.codifferential().norm() < 1e-14);
    }

    #[test]
    fn flat_round_trip() {
        let mut g = crate::rng::XorShift64Star::new(5);
        let mut cf = CoForm::zero(4, 2);
        for a in 0..4 {
            for c in cf.component_mut(a).coeffs_mut() {
                *c = g.uniform();
            }
        }
        let flat = cf.to_flat();
        let back = CoForm::from_flat(4, 2, &flat);
        assert!(cf.residual_to(&back) < 1e-15);
    }
}

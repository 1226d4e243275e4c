//! Closed-form recovery in the low complex dimensions.
//!
//! For n = 3 the top part of the rate splits into two lines and drags a
//! matching split of the second part with it; both channels are read off
//! the starred differentials of the volume parts.  For n = 2 the rate is
//! spanned by the two volume parts themselves and everything reduces to
//! three one-form combinations.  For n = 1 the rate vanishes identically
//! and only the one-form part survives.

use nalgebra::DMatrix;

use crate::coform::CoForm;
use crate::error::Result;
use crate::form::{Form, Vector};
use crate::recover::{i_dstar_omega, recover_eta, recover_w3, RECOVER_TOL};
use crate::structure::SUStructure;
use crate::torsion::{coderivative_part, jet_from_nabla_omega, PsiRateInverse, SUTorsionJet};

/// Per-dimension recovery summary, alongside the jet itself.
#[derive(Debug, Clone)]
pub enum LowDimReport {
    /// n = 3: the two top lines, the signed second parts, the middle part,
    /// and the one-form data.
    N3 {
        w1_plus: f64,
        w1_minus: f64,
        w2_plus: CoForm,
        w2_minus: CoForm,
        w3: CoForm,
        id_star_omega: Vector,
        eta: Vector,
    },
    /// n = 2: the expansion one-forms of the rate over the volume parts.
    N2 {
        xi_plus: Vector,
        xi_minus: Vector,
        eta: Vector,
    },
    /// n = 1: the coordinates of the torsion one-form in the adapted frame.
    N1 { eta_plus: f64, eta_minus: f64 },
}

/// Matrix of the pairing `(i, j) -> <e_i ⌟ psi_+, a_j> / 2` that encodes a
/// rate through the contraction basis of its component space.
fn channel_matrix(s: &SUStructure, a: &CoForm) -> DMatrix<f64> {
    let m = s.dim();
    let mut r = DMatrix::zeros(m, m);
    for i in 0..m {
        let gi = s.psi_plus().interior(&Vector::basis(m, i));
        for j in 0..m {
            r[(i, j)] = gi.inner(a.component(j)) / 2.0;
        }
    }
    r
}

/// Inverse of [`channel_matrix`]: components rebuilt over `e_i ⌟ psi_+`,
/// which is an orthogonal basis of the component space scaled by sqrt(2).
fn rate_from_channel(s: &SUStructure, r: &DMatrix<f64>) -> CoForm {
    let m = s.dim();
    let comps = (0..m)
        .map(|j| {
            let mut c = Form::zero(m, 2);
            for i in 0..m {
                c.add_scaled_assign(&s.psi_plus().interior(&Vector::basis(m, i)), r[(i, j)]);
            }
            c
        })
        .collect();
    CoForm::from_components(comps)
}

/// Splits a rate lying in the first two parts into its two signed channels
/// (n = 3): the symmetric half of the channel matrix spans the plus channel
/// and the skew half the minus channel.
pub fn split_pm_n3(s: &SUStructure, a: &CoForm) -> (CoForm, CoForm) {
    assert_eq!(s.n(), 3, "the signed refinement exists at n = 3");
    let r = channel_matrix(s, a);
    let sym = (&r + &r.transpose()) * 0.5;
    let skew = (&r - &r.transpose()) * 0.5;
    (rate_from_channel(s, &sym), rate_from_channel(s, &skew))
}

/// Co-form with component `(row i of t) ∧ omega` in direction `i`.
fn row_wedge_omega(s: &SUStructure, t: &DMatrix<f64>) -> CoForm {
    let m = s.dim();
    let comps = (0..m)
        .map(|i| {
            let row = Vector::from_coords((0..m).map(|j| t[(i, j)]).collect());
            row.one_form().wedge(s.omega())
        })
        .collect();
    CoForm::from_components(comps)
}

/// Co-form `sum_i e_i ⊗ e_i ∧ omega`.
fn e_e_omega(s: &SUStructure) -> CoForm {
    let m = s.dim();
    CoForm::from_components(
        (0..m)
            .map(|i| Vector::basis(m, i).one_form().wedge(s.omega()))
            .collect(),
    )
}

/// Co-form `sum_i e_i ⊗ (I e_i) ∧ omega`.
fn e_ie_omega(s: &SUStructure) -> CoForm {
    let m = s.dim();
    CoForm::from_components(
        (0..m)
            .map(|i| {
                Vector::basis(m, i)
                    .apply(s.i_mat())
                    .one_form()
                    .wedge(s.omega())
            })
            .collect(),
    )
}

/// Reconstruction at n = 3.  The scalar parameters of the two top lines are
/// `12 w_+ = <*(d psi_-), omega>` and `12 w_- = -<*(d psi_+), omega>`; the
/// combined first-and-second channels are recovered from
///
/// * plus:  `4 x_+ = -<*(d psi_-), omega> Σ e_i ⊗ e_i ∧ omega
///                  + Σ e_i ⊗ row_i(-(I S_- + S_- I)) ∧ omega`
/// * minus: `-4 x_- = <*(d psi_+), omega> Σ e_i ⊗ (I e_i) ∧ omega
///                  + Σ e_i ⊗ row_i(S_+ - I S_+ I) ∧ omega`
///
/// with `S_±` the skew matrices of `*(d psi_±)`; the middle part comes from
/// `d omega` and the rest from the shared formulas.
pub fn recover_n3(
    s: &SUStructure,
    d_omega: &Form,
    d_psi_plus: &Form,
    d_psi_minus: &Form,
) -> Result<(SUTorsionJet, LowDimReport)> {
    assert_eq!(s.n(), 3);
    let inv = PsiRateInverse::new(s);
    let eta = recover_eta(s, d_omega, d_psi_plus, d_psi_minus)?;
    let id_star = i_dstar_omega(s, d_omega);
    let mu = id_star.apply(s.i_mat()).scaled(-1.0);
    let w4 = coderivative_part(s, &mu);

    let sd_plus = s.star(d_psi_plus);
    let sd_minus = s.star(d_psi_minus);
    let w1_plus = sd_minus.inner(s.omega()) / 12.0;
    let w1_minus = -sd_plus.inner(s.omega()) / 12.0;

    let sk_minus = sd_minus.to_skew_matrix();
    let t_plus = -(s.i_mat() * &sk_minus + &sk_minus * s.i_mat());
    let mut img_plus = row_wedge_omega(s, &t_plus);
    img_plus.add_scaled_assign(&e_e_omega(s), -sd_minus.inner(s.omega()));
    let w12_plus = inv.apply(&img_plus.scaled(0.25), RECOVER_TOL)?;

    let sk_plus = sd_plus.to_skew_matrix();
    let t_minus = &sk_plus - s.i_mat() * &sk_plus * s.i_mat();
    let mut img_minus = row_wedge_omega(s, &t_minus);
    img_minus.add_scaled_assign(&e_ie_omega(s), sd_plus.inner(s.omega()));
    let w12_minus = inv.apply(&img_minus.scaled(-0.25), RECOVER_TOL)?;

    let mut w2_plus = w12_plus;
    w2_plus.add_scaled_assign(&CoForm::from_form(s.psi_plus()), -w1_plus);
    let mut w2_minus = w12_minus;
    w2_minus.add_scaled_assign(&CoForm::from_form(s.psi_minus()), -w1_minus);
    let w3 = recover_w3(s, d_omega, &id_star);

    let mut rate = CoForm::from_form(s.psi_plus()).scaled(w1_plus);
    rate.add_scaled_assign(&CoForm::from_form(s.psi_minus()), w1_minus);
    rate.add_scaled_assign(&w2_plus, 1.0);
    rate.add_scaled_assign(&w2_minus, 1.0);
    rate.add_scaled_assign(&w3, 1.0);
    rate.add_scaled_assign(&w4, 1.0);
    let jet = jet_from_nabla_omega(s.clone(), eta.clone(), &rate)?;
    let report = LowDimReport::N3 {
        w1_plus,
        w1_minus,
        w2_plus,
        w2_minus,
        w3,
        id_star_omega: id_star,
        eta,
    };
    Ok((jet, report))
}

/// Rate with components `xi_+[a] psi_+ + xi_-[a] psi_-` (n = 2, where the
/// component space is spanned by the two volume parts).
pub fn rate_from_xi_pair(s: &SUStructure, xi_plus: &Vector, xi_minus: &Vector) -> CoForm {
    assert_eq!(s.n(), 2);
    let m = s.dim();
    let comps = (0..m)
        .map(|a| {
            let mut c = s.psi_plus().scaled(xi_plus.coords[a]);
            c.add_scaled_assign(s.psi_minus(), xi_minus.coords[a]);
            c
        })
        .collect();
    CoForm::from_components(comps)
}

/// Expansion one-forms of a rate over the volume parts (n = 2):
/// `xi_±[a] = <component a, psi_±> / 2`.
pub fn decompose_n2(jet: &SUTorsionJet) -> (Vector, Vector) {
    let s = jet.structure();
    assert_eq!(s.n(), 2);
    let m = s.dim();
    let rate = jet.nabla_omega();
    let xi_plus = Vector::from_coords(
        (0..m)
            .map(|a| rate.component(a).inner(s.psi_plus()) / 2.0)
            .collect(),
    );
    let xi_minus = Vector::from_coords(
        (0..m)
            .map(|a| rate.component(a).inner(s.psi_minus()) / 2.0)
            .collect(),
    );
    (xi_plus, xi_minus)
}

/// Matrix of the contraction `x -> (x ⌟ psi) viewed as a vector`; the two
/// instances used at n = 2 are orthogonal, so transposition inverts them.
fn contraction_matrix(s: &SUStructure, psi: &Form) -> DMatrix<f64> {
    let m = s.dim();
    let mut out = DMatrix::zeros(m, m);
    for i in 0..m {
        let col = psi.interior(&Vector::basis(m, i)).to_vector();
        for j in 0..m {
            out[(j, i)] = col.coords[j];
        }
    }
    out
}

/// Reconstruction at n = 2 from the three combinations
///
/// * `A = *(*(d psi_+) ∧ psi_+) = -xi_+ ⌟ psi_- + 2 eta`
/// * `B = *(*(d psi_-) ∧ psi_-) =  xi_- ⌟ psi_+ + 2 eta`
/// * `C = *(*(d omega) ∧ omega) =  xi_- ⌟ psi_+ - xi_+ ⌟ psi_-`
///
/// so `4 eta = A + B - C`, `2 xi_- ⌟ psi_+ = B - A + C` and
/// `2 xi_+ ⌟ psi_- = B - A - C`.
pub fn recover_n2(
    s: &SUStructure,
    d_omega: &Form,
    d_psi_plus: &Form,
    d_psi_minus: &Form,
) -> Result<(SUTorsionJet, LowDimReport)> {
    assert_eq!(s.n(), 2);
    let a = s.star(&s.star(d_psi_plus).wedge(s.psi_plus())).to_vector();
    let b = s.star(&s.star(d_psi_minus).wedge(s.psi_minus())).to_vector();
    let c = s.star(&s.star(d_omega).wedge(s.omega())).to_vector();
    let eta = a.add(&b).sub(&c).scaled(0.25);
    let contract_minus = b.sub(&a).add(&c).scaled(0.5);
    let contract_plus = b.sub(&a).sub(&c).scaled(0.5);
    // Invert the two orthogonal contraction maps by transposition.
    let xi_minus = Vector::from_coords(
        (contraction_matrix(s, s.psi_plus()).transpose()
            * nalgebra::DVector::from_column_slice(&contract_minus.coords))
        .iter()
        .cloned()
        .collect(),
    );
    let xi_plus = Vector::from_coords(
        (contraction_matrix(s, s.psi_minus()).transpose()
            * nalgebra::DVector::from_column_slice(&contract_plus.coords))
        .iter()
        .cloned()
        .collect(),
    );
    let rate = rate_from_xi_pair(s, &xi_plus, &xi_minus);
    let jet = jet_from_nabla_omega(s.clone(), eta.clone(), &rate)?;
    Ok((
        jet,
        LowDimReport::N2 {
            xi_plus,
            xi_minus,
            eta,
        },
    ))
}

/// Reconstruction at n = 1, where the rate vanishes identically and the
/// one-form coordinates are `eta_+ = -*(d psi_-)`, `eta_- = *(d psi_+)` in
/// the adapted frame.
pub fn recover_n1(
    s: &SUStructure,
    d_psi_plus: &Form,
    d_psi_minus: &Form,
) -> Result<(SUTorsionJet, LowDimReport)> {
    assert_eq!(s.n(), 1);
    let eta_plus = -s.star(d_psi_minus).coeffs()[0];
    let eta_minus = s.star(d_psi_plus).coeffs()[0];
    let mut eta = s.psi_plus().to_vector().scaled(eta_plus);
    eta = eta.add(&s.psi_minus().to_vector().scaled(eta_minus));
    let m = s.dim();
    let jet = SUTorsionJet::new(s.clone(), eta, vec![DMatrix::zeros(m, m); m])?;
    Ok((jet, LowDimReport::N1 { eta_plus, eta_minus }))
}

/// Sectional curvature of the frame plane at n = 1 from first derivatives
/// of the one-form coordinates:
/// `K = d eta_+ (psi_+) + d eta_- (psi_-) - eta_+^2 - eta_-^2`.
pub fn curvature_n1(
    s: &SUStructure,
    eta_plus: f64,
    eta_minus: f64,
    d_eta_plus: &Vector,
    d_eta_minus: &Vector,
) -> f64 {
    assert_eq!(s.n(), 1);
    d_eta_plus.dot(&s.psi_plus().to_vector()) + d_eta_minus.dot(&s.psi_minus().to_vector())
        - eta_plus * eta_plus
        - eta_minus * eta_minus
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recover::{full_recover, RECOVER_TOL};
    use crate::rng::XorShift64Star;
    use crate::structure::{standard_structure, ConformalChange};
    use crate::torsion::class_split;

    #[test]
    fn signed_split_partitions_and_is_idempotent() {
        let s = standard_structure(3).unwrap();
        let inv = PsiRateInverse::new(&s);
        let jet = SUTorsionJet::random(s.clone(), 12);
        let parts = class_split(&s, &jet.nabla_omega(), &inv).unwrap();
        let mut low = parts[0].clone();
        low.add_scaled_assign(&parts[1], 1.0);
        let (p, m) = split_pm_n3(&s, &low);
        let mut resum = p.clone();
        resum.add_scaled_assign(&m, 1.0);
        assert!(resum.residual_to(&low) < 1e-12);
        let (pp, pm) = split_pm_n3(&s, &p);
        assert!(pp.residual_to(&p) < 1e-12);
        assert!(pm.norm() < 1e-12);
    }

    #[test]
    fn signed_split_puts_the_volume_lines_in_their_channels() {
        let s = standard_structure(3).unwrap();
        let line_plus = CoForm::from_form(s.psi_plus());
        let (p, m) = split_pm_n3(&s, &line_plus);
        assert!(p.residual_to(&line_plus) < 1e-12);
        assert!(m.norm() < 1e-12);
        let line_minus = CoForm::from_form(s.psi_minus());
        let (p, m) = split_pm_n3(&s, &line_minus);
        assert!(m.residual_to(&line_minus) < 1e-12);
        assert!(p.norm() < 1e-12);
    }

    #[test]
    fn n3_recovery_round_trips_random_jets() {
        let s = standard_structure(3).unwrap();
        for seed in 0..5u64 {
            let jet = SUTorsionJet::random(s.clone(), 300 + seed);
            let d = jet.derive();
            let (back, _) = recover_n3(&s, &d.d_omega, &d.d_psi_plus, &d.d_psi_minus).unwrap();
            assert!(back.eta().residual_to(jet.eta()) < 1e-10);
            for (x, y) in jet.xi().iter().zip(back.xi()) {
                assert!((x - y).norm() / x.norm().max(1.0) < 1e-10);
            }
        }
    }

    #[test]
    fn n3_recovery_reads_seeded_top_scalars() {
        let s = standard_structure(3).unwrap();
        let mut rate = CoForm::from_form(s.psi_plus()).scaled(2.0);
        rate.add_scaled_assign(&CoForm::from_form(s.psi_minus()), 3.0);
        let jet = jet_from_nabla_omega(s.clone(), Vector::zeros(6), &rate).unwrap();
        let d = jet.derive();
        let (_, report) = recover_n3(&s, &d.d_omega, &d.d_psi_plus, &d.d_psi_minus).unwrap();
        let LowDimReport::N3 {
            w1_plus, w1_minus, ..
        } = report
        else {
            panic!("wrong report variant")
        };
        assert!((w1_plus - 2.0).abs() < 1e-12);
        assert!((w1_minus - 3.0).abs() < 1e-12);
    }

    #[test]
    fn n3_signed_channels_match_the_unsigned_split() {
        let s = standard_structure(3).unwrap();
        let inv = PsiRateInverse::new(&s);
        let jet = SUTorsionJet::random(s.clone(), 47);
        let parts = class_split(&s, &jet.nabla_omega(), &inv).unwrap();
        let d = jet.derive();
        let (_, report) = recover_n3(&s, &d.d_omega, &d.d_psi_plus, &d.d_psi_minus).unwrap();
        let LowDimReport::N3 {
            w2_plus,
            w2_minus,
            w3,
            ..
        } = report
        else {
            panic!("wrong report variant")
        };
        let (expect_p, expect_m) = split_pm_n3(&s, &parts[1]);
        assert!(w2_plus.residual_to(&expect_p) < 1e-9);
        assert!(w2_minus.residual_to(&expect_m) < 1e-9);
        assert!(w3.residual_to(&parts[2]) < 1e-9);
    }

    #[test]
    fn n3_top_type_differentials_have_the_closed_form() {
        let s = standard_structure(3).unwrap();
        let (wp, wm) = (0.7, -1.3);
        let mut rng = XorShift64Star::new(8);
        let eta = Vector::from_coords(rng.uniform_vec(6));
        let mut rate = CoForm::from_form(s.psi_plus()).scaled(wp);
        rate.add_scaled_assign(&CoForm::from_form(s.psi_minus()), wm);
        let jet = jet_from_nabla_omega(s.clone(), eta.clone(), &rate).unwrap();
        let d = jet.derive();

        let mut expect_dw = s.psi_plus().scaled(3.0 * wp);
        expect_dw.add_scaled_assign(s.psi_minus(), 3.0 * wm);
        assert!(d.d_omega.residual_to(&expect_dw) < 1e-12);

        let omsq = s.omega().wedge(s.omega());
        let i_eta = eta.apply(s.i_mat()).one_form();
        let mut expect_dp = omsq.scaled(-2.0 * wm);
        expect_dp.add_scaled_assign(&i_eta.wedge(s.psi_minus()), -3.0);
        assert!(d.d_psi_plus.residual_to(&expect_dp) < 1e-12);

        let mut expect_dm = omsq.scaled(2.0 * wp);
        expect_dm.add_scaled_assign(&i_eta.wedge(s.psi_plus()), 3.0);
        assert!(d.d_psi_minus.residual_to(&expect_dm) < 1e-12);
    }

    #[test]
    fn n2_decomposition_reads_seeded_expansion() {
        let s = standard_structure(2).unwrap();
        let xi_plus = Vector::basis(4, 0);
        let xi_minus = Vector::zeros(4);
        let rate = rate_from_xi_pair(&s, &xi_plus, &xi_minus);
        let jet = jet_from_nabla_omega(s.clone(), Vector::zeros(4), &rate).unwrap();
        let (xp, xm) = decompose_n2(&jet);
        assert!(xp.residual_to(&xi_plus) < 1e-12);
        assert!(xm.norm() < 1e-12);
    }

    #[test]
    fn n2_recovery_round_trips_random_jets() {
        let s = standard_structure(2).unwrap();
        for seed in 0..5u64 {
            let jet = SUTorsionJet::random(s.clone(), 200 + seed);
            let d = jet.derive();
            let (back, report) = recover_n2(&s, &d.d_omega, &d.d_psi_plus, &d.d_psi_minus).unwrap();
            assert!(back.eta().residual_to(jet.eta()) < 1e-10);
            for (x, y) in jet.xi().iter().zip(back.xi()) {
                assert!((x - y).norm() / x.norm().max(1.0) < 1e-10);
            }
            let LowDimReport::N2 {
                xi_plus, xi_minus, ..
            } = report
            else {
                panic!("wrong report variant")
            };
            let (xp, xm) = decompose_n2(&jet);
            assert!(xi_plus.residual_to(&xp) < 1e-10);
            assert!(xi_minus.residual_to(&xm) < 1e-10);
        }
    }

    #[test]
    fn n2_differentials_have_the_closed_form() {
        let s = standard_structure(2).unwrap();
        let jet = SUTorsionJet::random(s.clone(), 21);
        let d = jet.derive();
        let (xp, xm) = decompose_n2(&jet);
        let mut expect_dp = xp.one_form().wedge(s.omega()).scaled(-1.0);
        expect_dp.add_scaled_assign(&jet.eta().one_form().wedge(s.psi_plus()), -2.0);
        assert!(d.d_psi_plus.residual_to(&expect_dp) < 1e-12);
        let mut expect_dm = xm.one_form().wedge(s.omega()).scaled(-1.0);
        expect_dm.add_scaled_assign(&jet.eta().one_form().wedge(s.psi_minus()), -2.0);
        assert!(d.d_psi_minus.residual_to(&expect_dm) < 1e-12);
        let mut t = s.psi_minus().interior(&xp);
        t.add_scaled_assign(&s.psi_plus().interior(&xm), -1.0);
        let expect_dw = t.wedge(s.omega());
        assert!(d.d_omega.residual_to(&expect_dw) < 1e-12);
    }

    #[test]
    fn n2_conformal_change_shifts_the_expansion_forms() {
        let s = standard_structure(2).unwrap();
        let jet = SUTorsionJet::random(s.clone(), 33);
        let mut rng = XorShift64Star::new(90);
        let df = Vector::from_coords(rng.uniform_vec(4));
        let moved = jet
            .conformal_transform(&ConformalChange { df: df.clone() })
            .unwrap();
        let (xp, xm) = decompose_n2(&jet);
        let (xp_o, xm_o) = decompose_n2(&moved);
        let expect_p = xp.sub(&s.psi_minus().interior(&df).to_vector());
        let expect_m = xm.add(&s.psi_plus().interior(&df).to_vector());
        assert!(xp_o.residual_to(&expect_p) < 1e-10);
        assert!(xm_o.residual_to(&expect_m) < 1e-10);
    }

    #[test]
    fn n1_recovery_round_trips_and_reads_coordinates() {
        let s = standard_structure(1).unwrap();
        let jet = SUTorsionJet::random(s.clone(), 5);
        let d = jet.derive();
        let (back, report) = recover_n1(&s, &d.d_psi_plus, &d.d_psi_minus).unwrap();
        assert!(back.eta().residual_to(jet.eta()) < 1e-12);
        let LowDimReport::N1 {
            eta_plus,
            eta_minus,
        } = report
        else {
            panic!("wrong report variant")
        };
        assert!((eta_plus - jet.eta().coords[0]).abs() < 1e-12);
        assert!((eta_minus - jet.eta().coords[1]).abs() < 1e-12);
    }

    #[test]
    fn n1_curvature_examples() {
        let s = standard_structure(1).unwrap();
        let z = Vector::zeros(2);
        assert_eq!(curvature_n1(&s, 1.0, 0.0, &z, &z), -1.0);
        assert_eq!(curvature_n1(&s, 0.0, 0.0, &Vector::basis(2, 0), &z), 1.0);
        assert_eq!(curvature_n1(&s, 0.0, 0.0, &z, &Vector::basis(2, 1)), 1.0);
    }

    #[test]
    fn low_dimensions_flow_through_the_shared_entry_point() {
        for n in 1..=3usize {
            let s = standard_structure(n).unwrap();
            let jet = SUTorsionJet::random(s.clone(), 400 + n as u64);
            let d = jet.derive();
            let back = full_recover(&s, &d.d_omega, &d.d_psi_plus, &d.d_psi_minus).unwrap();
            assert!(back.eta().residual_to(jet.eta()) < RECOVER_TOL);
        }
    }
}

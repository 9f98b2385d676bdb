//! A Gaussian bump as a Lip(2) jet: operator norms, pointwise Λ and the
//! Lip norm on a small point set.

use std::sync::Arc;

use holgrim::jets::Domain;
use holgrim::problems::{Analytic, Feature};

fn main() -> holgrim::error::Result<()> {
    let bump = Feature::Gaussian { centre: vec![0.5, 0.5], width: 0.3, weight: vec![1.0] };
    let analytic = Analytic::new(2.0, 2, 1, vec![bump])?;
    let domain = Arc::new(Domain::new(vec![
        vec![0.5, 0.5],
        vec![0.8, 0.5],
        vec![0.2, 0.9],
        vec![1.0, 0.0],
    ])?);
    let jet = analytic.jet(0, &domain)?;

    for p in 0..domain.len() {
        let value = jet.form(p, 0)?.operator_norm();
        let gradient = jet.form(p, 1)?.operator_norm();
        println!("{:?}: |f| = {value:.4}, |Df| = {gradient:.4}, Lambda^1 = {:.4}", domain.point(p), jet.lambda_l(p, 1)?);
    }
    println!("Lip(2) norm on the points: {:.4}", jet.lip_norm());
    println!("analytic bound on the unit cube: {:.4}", analytic.lip_bound(0, &[1.0, 1.0]));
    Ok(())
}

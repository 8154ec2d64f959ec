//! Moving between the simplex and Euclidean coordinates: ilr and alr
//! transforms, their inverses, and translating coefficient vectors between
//! log and ilr coordinates.

use compiv::logratio::{alr, alr_inv, beta_ilr_to_log, beta_log_to_ilr, ilr, ilr_inv, LogRatioBasis};
use compiv::simplex::{aitchison_inner, closure};
use nalgebra::DVector;

fn main() -> Result<(), compiv::Error> {
    let basis = LogRatioBasis::helmert(4)?;
    let x = closure(&[12.0, 3.0, 60.0, 25.0])?;
    let y = closure(&[5.0, 5.0, 45.0, 45.0])?;

    let tx = ilr(&x, &basis)?;
    let ty = ilr(&y, &basis)?;
    println!("ilr(x) = {:?}", tx.as_slice());

    // ilr is an isometry: simplex inner products become Euclidean ones.
    println!("aitchison <x,y> = {:.10}", aitchison_inner(&x, &y)?);
    println!("euclidean <ilr(x),ilr(y)> = {:.10}", tx.dot(&ty));

    let back = ilr_inv(&tx, &basis)?;
    let gap: f64 = x
        .parts()
        .iter()
        .zip(back.parts())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        ;
    println!("ilr round trip max abs error = {gap:.2e}");

    // alr is cheaper but not an isometry; it still inverts exactly.
    let ax = alr(&x)?;
    let aback = alr_inv(&ax)?;
    println!("alr(x) = {:?}", ax.as_slice());
    println!(
        "alr round trip max abs error = {:.2e}",
        x.parts()
            .iter()
            .zip(aback.parts())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    );

    // A sum-zero coefficient vector in log coordinates has an exact ilr
    // counterpart, and the two parameterizations give the same effects.
    let beta_log = DVector::from_vec(vec![1.5, -0.5, -2.0, 1.0]);
    let beta_ilr = beta_log_to_ilr(&beta_log, &basis)?;
    let recovered = beta_ilr_to_log(&beta_ilr, &basis)?;
    println!("beta_log  = {:?}", beta_log.as_slice());
    println!("beta_ilr  = {:?}", beta_ilr.as_slice());
    println!("recovered = {:?}", recovered.as_slice());

    let effect_log: f64 = beta_log
        .iter()
        .zip(x.parts())
        .map(|(b, v)| b * v.ln())
        .sum();
    println!("effect in log coords = {:.10}", effect_log);
    println!("effect in ilr coords = {:.10}", beta_ilr.dot(&tx));
    Ok(())
}

//! Vector-space operations on the simplex: closure, perturbation, powering,
//! the Aitchison inner product, and the diversity summaries that collapse a
//! composition to one number.

use compiv::simplex::{aitchison_inner, closure, diversity, perturb, power, Composition, Diversity};

fn show(label: &str, x: &Composition) {
    let parts: Vec<String> = x.parts().iter().map(|v| format!("{v:.4}")).collect();
    println!("{label:<18} [{}]", parts.join(", "));
}

fn main() -> Result<(), compiv::Error> {
    // Raw abundances only matter up to scale: closure maps them to the simplex.
    let x = closure(&[30.0, 60.0, 10.0])?;
    let y = closure(&[1.0, 2.0, 7.0])?;
    show("x", &x);
    show("y", &y);

    // Perturbation is the simplex analogue of vector addition; powering is
    // scalar multiplication. Together they make the simplex a vector space.
    show("x + y", &perturb(&x, &y)?);
    show("2 * x", &power(2.0, &x)?);
    show("x - x", &perturb(&x, &power(-1.0, &x)?)?);

    let norm_sq = aitchison_inner(&x, &x)?;
    println!("\n<x, x>            {norm_sq:.6}");
    println!("<x, y>            {:.6}", aitchison_inner(&x, &y)?);

    // The neutral element has norm zero.
    let e = closure(&[1.0, 1.0, 1.0])?;
    println!("<e, e>            {:.6}", aitchison_inner(&e, &e)?);

    println!();
    for d in [Diversity::Richness, Diversity::Shannon, Diversity::Simpson] {
        println!("{:<18} {:.6}", d.name(), diversity(&x, d));
    }

    // Shannon entropy is maximal at the uniform composition.
    println!("shannon(uniform)   {:.6}", diversity(&e, Diversity::Shannon));
    println!("ln 3               {:.6}", 3f64.ln());
    Ok(())
}

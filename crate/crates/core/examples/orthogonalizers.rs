//! How orthogonal is BA for each orthogonalizer, as the sample grows?
use htica::orthogonalize::{orthogonalize, BodySource, OrthMethod};
use htica::sampling::{IcaInstance, MixingKind, TailExponents};

fn main() -> htica::Result<()> {
    let eta = TailExponents::new([vec![6.0; 4], vec![2.1; 2]].concat())?;
    let inst = IcaInstance::random(eta, MixingKind::RandomUnitColumns, 11)?;
    let a = inst.mixing();
    println!(
        "{:>6} {:>11} {:>10} {:>12}",
        "N", "method", "sigma_min", "cond"
    );
    for n in [500, 2000, 8000] {
        let x = inst.generate(n)?;
        for method in OrthMethod::ALL {
            let b = orthogonalize(&x, method, BodySource::SameSamples, Some(a))?;
            let d = b.diagnostics(a);
            println!(
                "{n:>6} {method:>11} {:>10.4} {:>12.2}",
                d.sigma_min_normalized, d.condition_number
            );
        }
    }
    Ok(())
}

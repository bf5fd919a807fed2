//! Plain FastICA on light-tailed sources, with both contrasts.
use htica::eval::evaluate;
use htica::ica::{fastica, ContrastFunction};
use htica::sampling::{substream, IcaInstance, MixingKind, TailExponents};

fn main() -> htica::Result<()> {
    let inst = IcaInstance::random(
        TailExponents::uniform(4, 6.0)?,
        MixingKind::RandomUnitColumns,
        2,
    )?;
    let x = inst.generate(50_000)?;
    for contrast in ContrastFunction::ALL {
        let est = fastica(&x, contrast, &mut substream(2, 9), 1e-6, 1000)?;
        let r = evaluate(inst.mixing(), &est.a_hat)?;
        println!(
            "{contrast}: {} iterations, converged {}, frobenius {:.4}, amari {:.4}",
            est.iterations,
            est.all_converged(),
            r.frobenius_error,
            r.amari_index
        );
    }
    Ok(())
}

//! Pick a damping radius and thin a heavy-tailed sample with it.
use htica::damping::{acceptance_fraction, choose_radius, damp, DampingParams};
use htica::sampling::{substream, IcaInstance, MixingKind, TailExponents};

fn max_norm(x: &htica::SampleMatrix) -> f64 {
    x.row_norms().into_iter().fold(0.0, f64::max)
}

fn main() -> htica::Result<()> {
    let inst = IcaInstance::random(
        TailExponents::uniform(5, 2.1)?,
        MixingKind::RandomUnitColumns,
        5,
    )?;
    let x = inst.generate(50_000)?;
    for rejection in [0.1, 0.25, 0.5] {
        let params = DampingParams::new(rejection, 0.01)?;
        let r = choose_radius(&x, &params)?;
        let report = damp(&x, r, &mut substream(5, 1))?;
        println!(
            "target rejection {rejection:.2}: R = {r:.3}, expected acceptance {:.4}, observed {:.4}, kept {} rows, largest norm {:.1} -> {:.1}",
            acceptance_fraction(&x, r)?,
            report.acceptance_rate,
            report.accepted.len(),
            max_norm(&x),
            max_norm(&report.accepted),
        );
    }
    Ok(())
}

//! Gauge and membership queries against the empirical centroid body of a
//! small heavy-tailed sample.
use htica::centroid::{EmpiricalCentroidBody, Verdict};
use htica::sampling::{IcaInstance, MixingKind, TailExponents};

fn main() -> htica::Result<()> {
    let inst = IcaInstance::random(
        TailExponents::uniform(3, 2.1)?,
        MixingKind::RandomUnitColumns,
        3,
    )?;
    let body = EmpiricalCentroidBody::new(inst.generate(2000)?);
    println!("{} points in R^{}", body.len(), body.dim());

    let mut solver = body.solver();
    for q in [
        [0.1, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.3, -0.3, 0.2],
        [5.0, 5.0, 5.0],
    ] {
        let lp = solver.solve(&q)?;
        let ans = solver.membership(&q, 0.1)?;
        let inside = if ans.verdict == Verdict::Yes {
            "inside"
        } else {
            "outside"
        };
        println!(
            "q = {q:?}: gauge {:.4} ({inside}), {} simplex iterations",
            ans.gauge, lp.iterations
        );
    }
    for u in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
        println!("support h({u:?}) = {:.4}", body.support_function(&u));
    }
    Ok(())
}

//! Draw heavy-tailed sources and compare empirical moments and tails with
//! the closed forms.
use htica::sampling::{first_absolute_moment, IcaInstance, MixingKind, TailExponents};

fn main() -> htica::Result<()> {
    let eta = TailExponents::new(vec![1.5, 2.1, 3.0, 6.0])?;
    let inst = IcaInstance::new(nalgebra::DMatrix::identity(4, 4), eta.clone(), 7)?;
    let s = inst.sources(200_000)?;
    println!(
        "{:>5} {:>10} {:>10} {:>12} {:>12}",
        "eta", "E|X|", "mean |x|", "P(|X|>10)", "observed"
    );
    for (j, &e) in eta.as_slice().iter().enumerate() {
        let col = s.column(j);
        let mean = col.iter().map(|v| v.abs()).sum::<f64>() / col.len() as f64;
        let tail = col.iter().filter(|v| v.abs() > 10.0).count() as f64 / col.len() as f64;
        let exact = first_absolute_moment(e).map_or("inf".to_string(), |m| format!("{m:.4}"));
        let p10 = ((10.0 + 1.5) / 1.5f64).powf(1.0 - e);
        println!("{e:>5} {exact:>10} {mean:>10.4} {p10:>12.6} {tail:>12.6}");
    }

    let mixed = IcaInstance::random(
        TailExponents::uniform(3, 2.5)?,
        MixingKind::RandomUnitColumns,
        7,
    )?;
    println!("\nmixing matrix (unit columns):\n{:.4}", mixed.mixing());
    let x = mixed.generate(5)?;
    for row in x.rows() {
        println!("{row:>10.4?}");
    }
    Ok(())
}

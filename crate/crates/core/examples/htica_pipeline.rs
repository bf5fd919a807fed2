//! The full pipeline against plain FastICA when two sources have infinite
//! variance.
use htica::ica::{run_htica, ContrastFunction, PipelineConfig};
use htica::orthogonalize::{BodySource, OrthMethod};
use htica::sampling::{substream, IcaInstance, MixingKind, TailExponents};

fn main() -> htica::Result<()> {
    let eta = TailExponents::new([vec![6.0; 4], vec![2.1; 2]].concat())?;
    let inst = IcaInstance::random(eta, MixingKind::RandomUnitColumns, 17)?;
    let x = inst.generate(20_000)?;

    let runs = [
        ("centroid + damping", OrthMethod::Centroid, true),
        ("covariance + damping", OrthMethod::Covariance, true),
        ("plain FastICA", OrthMethod::Identity, false),
    ];
    for (name, method, damped) in runs {
        let mut config = PipelineConfig::new(method, damped, ContrastFunction::Tanh);
        config.body = BodySource::FirstRows(2000);
        match run_htica(&x, &config, &mut substream(17, 1), Some(inst.mixing())) {
            Ok((est, Some(r))) => println!(
                "{name:>22}: frobenius {:.4}, amari {:.4}, {} iterations",
                r.frobenius_error, r.amari_index, est.iterations
            ),
            Ok((_, None)) => unreachable!("truth was supplied"),
            Err(e) => println!("{name:>22}: {e}"),
        }
    }
    Ok(())
}

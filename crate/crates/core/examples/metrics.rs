//! Column matching, Frobenius error and Amari index on a hand-made estimate.
use htica::eval::evaluate;
use nalgebra::DMatrix;

fn main() -> htica::Result<()> {
    let a = DMatrix::from_columns(&[
        nalgebra::DVector::from_vec(vec![0.6, 0.8, 0.0]),
        nalgebra::DVector::from_vec(vec![0.0, 0.6, 0.8]),
        nalgebra::DVector::from_vec(vec![1.0, 0.0, 0.0]),
    ]);
    // columns shuffled, one flipped, one slightly off
    let off = (0.99f64, (1.0 - 0.99f64 * 0.99).sqrt());
    let a_hat = DMatrix::from_columns(&[
        nalgebra::DVector::from_vec(vec![off.0, off.1, 0.0]),
        nalgebra::DVector::from_vec(vec![-0.6, -0.8, 0.0]),
        nalgebra::DVector::from_vec(vec![0.0, 0.6, 0.8]),
    ]);
    let r = evaluate(&a, &a_hat)?;
    println!(
        "permutation {:?}, signs {:?}",
        r.matching.permutation, r.matching.signs
    );
    println!("aligned estimate:\n{:.4}", r.matching.align(&a_hat));
    println!(
        "frobenius {:.4}, amari {:.4}",
        r.frobenius_error, r.amari_index
    );
    Ok(())
}

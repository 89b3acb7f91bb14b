//! Delayed exponential of a non-constant matrix sequence, checked against its
//! difference relation, and the constant-sequence closed form.

use discrete_delay::random::{self, random_sequence};
use discrete_delay::{
    delayed_exp_permutable, linalg, p_table, Matrix, MatrixFamily, MatrixSequence,
};

fn main() -> discrete_delay::Result<()> {
    let m = 2;
    let seq = random_sequence(&mut random::seeded(1), 3, 8);
    let table = p_table(&seq, m, 20);

    println!("k   layers  max|e(k)|   max|e(k+1) - e(k) - D_k e(k-m)|");
    for k in 0..20i64 {
        let e = table.delayed_exp(k);
        let residual = table.delayed_exp(k + 1)
            - &e
            - seq.at(k as usize).as_ref() * table.delayed_exp(k - m as i64);
        let layers = if k > 0 {
            table.layers_at(k as usize)
        } else {
            0
        };
        println!(
            "{k:<3} {layers:<7} {:<11.4e} {:.2e}",
            e.amax(),
            residual.amax()
        );
    }

    let d = Matrix::from_row_slice(2, 2, &[0.3, -0.1, 0.2, 0.4]);
    let constant = p_table(&MatrixSequence::constant(d.clone()), m, 30);
    let closed = delayed_exp_permutable(&d, m, 30)?;
    println!(
        "\nconstant D, k = 30: table vs binomial closed form differ by {:.2e}",
        linalg::rel_diff(&constant.delayed_exp(30), &closed, &[])
    );
    Ok(())
}

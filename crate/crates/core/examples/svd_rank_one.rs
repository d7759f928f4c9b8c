//! Dominant singular triple and HOSVD of a noisy rank-one tensor.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_chanest::scenario::gaussian_matrix;
use ris_chanest::tensor::{dominant_svd, hosvd3, DenseTensor};
use ris_chanest::Complex64;

fn main() -> ris_chanest::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let abc = gaussian_matrix(4 + 3 + 5, 1, &mut rng);
    let v = abc.as_slice();
    let mut t = DenseTensor::from_fn(&[4, 3, 5], |i| v[i[0]] * v[4 + i[1]] * v[7 + i[2]])?;
    let noise = gaussian_matrix(t.len(), 1, &mut rng);
    for (x, w) in t.as_mut_slice().iter_mut().zip(noise.as_slice()) {
        *x += w * Complex64::new(0.05, 0.0);
    }

    let top = dominant_svd(&t.unfold(0)?)?;
    println!("mode-0 sigma_1 = {:.4}", top.sigma);

    let h = hosvd3(&t)?;
    let core = h.core.as_slice();
    let lead = core[0].norm_sqr() / h.core.frobenius_norm_sqr();
    println!("core energy in leading entry: {:.2}%", 100.0 * lead);
    println!("mode singular values (mode 0): {:?}", h.mode_singular_values[0].iter().map(|s| format!("{s:.3}")).collect::<Vec<_>>());
    Ok(())
}

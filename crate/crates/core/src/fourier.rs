//! Discrete Fourier transform on F_p^n.
//!
//! Convention: f^(xi) = E_x f(x) conj(e_F(xi . x)).

use num_complex::Complex64;

use crate::table::FunctionTable;

/// All Fourier coefficients, indexed like points.
pub fn transform(table: &FunctionTable) -> Vec<Complex64> {
    let s = table.space();
    let p = s.p() as usize;
    let mut data = table.values().to_vec();
    let size = data.len();
    let chars: Vec<Complex64> = (0..p).map(|j| s.field().character(j as u32).conj()).collect();
    let mut fiber = vec![Complex64::new(0.0, 0.0); p];
    let mut stride = 1;
    for _ in 0..s.n() {
        let block = stride * p;
        for base in (0..size).step_by(block) {
            for off in 0..stride {
                let start = base + off;
                if p == 2 {
                    let a = data[start];
                    let b = data[start + stride];
                    data[start] = a + b;
                    data[start + stride] = a - b;
                    continue;
                }
                for (t, slot) in fiber.iter_mut().enumerate() {
                    *slot = data[start + t * stride];
                }
                for freq in 0..p {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (t, &v) in fiber.iter().enumerate() {
                        acc += v * chars[(freq * t) % p];
                    }
                    data[start + freq * stride] = acc;
                }
            }
        }
        stride = block;
    }
    let scale = 1.0 / size as f64;
    for v in &mut data {
        *v *= scale;
    }
    data
}

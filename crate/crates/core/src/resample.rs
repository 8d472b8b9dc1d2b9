//! Evaluation of the band-limited (trigonometric) interpolant of a field at
//! affinely mapped points, f((x − x₀)/s), via a chirp-z transform per axis.
//! Points that fall outside the box read as zero: the field models a
//! function on ℝ^d that vanishes outside [-L, L)^d, not a periodic one.

use num_complex::Complex64;

use crate::grid::{dft_1d, Field, Grid};

struct AxisResampler {
    n: usize,
    conv_len: usize,
    pre: Vec<Complex64>,
    kernel_hat: Vec<Complex64>,
    post: Vec<Complex64>,
}

impl AxisResampler {
    /// Targets y_j = (x_j − shift)/scale for the nodes x_j of one axis.
    fn new(grid: &Grid, shift: f64, scale: f64) -> Self {
        let n = grid.points_per_axis();
        let l = grid.half_width();
        let h = grid.spacing();
        let dxi = grid.dxi();
        let a = (-l - shift) / scale;
        let b = h / scale;
        let alpha = dxi * b;
        let k_len = n + 1;
        let conv_len = (k_len + n - 1).next_power_of_two();
        let chirp = |m: f64| Complex64::from_polar(1.0, alpha * m * m / 2.0);

        let pre = (0..k_len)
            .map(|kp| {
                let k = kp as f64 - (n / 2) as f64;
                Complex64::from_polar(1.0, dxi * k * (a + l)) * chirp(kp as f64)
            })
            .collect();

        let mut kernel = vec![Complex64::new(0.0, 0.0); conv_len];
        for m in 0..n {
            kernel[m] = chirp(m as f64).conj();
        }
        for m in 1..k_len {
            kernel[conv_len - m] = chirp(m as f64).conj();
        }
        dft_1d(&mut kernel, false);

        let post = (0..n)
            .map(|j| {
                let y = a + j as f64 * b;
                if y >= -l && y < l {
                    let jf = j as f64;
                    chirp(jf) * Complex64::from_polar(1.0, -alpha * (n as f64) * jf / 2.0)
                        / (n as f64 * conv_len as f64)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();

        AxisResampler { n, conv_len, pre, kernel_hat: kernel, post }
    }

    fn apply(&self, line: &mut [Complex64]) {
        let n = self.n;
        let mut c = line.to_vec();
        dft_1d(&mut c, false);
        let mut buf = vec![Complex64::new(0.0, 0.0); self.conv_len];
        // signed order −n/2..=n/2 with the Nyquist coefficient split evenly
        for kp in 0..=n {
            let coeff = if kp == 0 || kp == n {
                c[n / 2] * 0.5
            } else {
                let k = kp as i64 - (n / 2) as i64;
                c[k.rem_euclid(n as i64) as usize]
            };
            buf[kp] = coeff * self.pre[kp];
        }
        dft_1d(&mut buf, false);
        for (z, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *z *= k;
        }
        dft_1d(&mut buf, true);
        for j in 0..n {
            line[j] = buf[j] * self.post[j];
        }
    }
}

/// Fraction of mass whose frequency along some axis exceeds |scale|·Nyquist,
/// i.e. content that a compression by `scale` cannot represent.
fn unresolved_fraction(field: &Field, scale: f64) -> f64 {
    if scale.abs() >= 1.0 {
        return 0.0;
    }
    let grid = field.grid;
    let mut data = field.values.clone();
    crate::grid::dft(&grid, &mut data, false);
    let cut = scale.abs() * grid.nyquist();
    let mut total = 0.0;
    let mut outside = 0.0;
    for (i, z) in data.iter().enumerate() {
        let w = z.norm_sqr();
        total += w;
        let xi = grid.frequency(i);
        if xi[..grid.dim()].iter().any(|v| v.abs() > cut) {
            outside += w;
        }
    }
    if total > 0.0 {
        outside / total
    } else {
        0.0
    }
}

/// Returns g(x) = f((x − shift)/scale) sampled on the same grid, together
/// with the fraction of spectral mass the map pushes past the Nyquist band.
/// `scale` may be negative (reflection).
pub fn resample_affine(field: &Field, shift: [f64; 2], scale: f64) -> (Field, f64) {
    let grid = field.grid;
    let n = grid.points_per_axis();
    let lost = unresolved_fraction(field, scale);
    let mut data = field.values.clone();
    if grid.dim() == 1 {
        AxisResampler::new(&grid, shift[0], scale).apply(&mut data);
    } else {
        let fast = AxisResampler::new(&grid, shift[1], scale);
        for row in data.chunks_mut(n) {
            fast.apply(row);
        }
        let slow = AxisResampler::new(&grid, shift[0], scale);
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            for r in 0..n {
                col[r] = data[r * n + c];
            }
            slow.apply(&mut col);
            for r in 0..n {
                data[r * n + c] = col[r];
            }
        }
    }
    let out = Field { grid, values: data, label: field.label.clone(), diverged: field.diverged };
    (out, lost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{l2_distance, make_grid, mass};

    fn bump(grid: Grid, c: f64) -> Field {
        Field::from_fn(grid, |x| {
            let r2 = (x[0] - c).powi(2) + if grid.dim() == 2 { x[1] * x[1] } else { 0.0 };
            Complex64::from_polar((-r2 / 2.0).exp(), 0.3 * x[0])
        })
    }

    #[test]
    fn identity_map_reproduces_samples() {
        let g = make_grid(1, 128, 10.0).unwrap();
        let f = bump(g, 0.5);
        let (r, lost) = resample_affine(&f, [0.0, 0.0], 1.0);
        assert!(lost == 0.0);
        assert!(l2_distance(&f, &r).unwrap() < 1e-12);
    }

    #[test]
    fn dilation_matches_analytic_samples() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let f = bump(g, 0.0);
        for s in [0.5, 0.8, 1.7, 3.0, -1.3] {
            let (r, _) = resample_affine(&f, [1.0, 0.0], s);
            let exact = Field::from_fn(g, |x| {
                let y = (x[0] - 1.0) / s;
                Complex64::from_polar((-y * y / 2.0).exp(), 0.3 * y)
            });
            let err = l2_distance(&r, &exact).unwrap();
            assert!(err < 1e-10, "scale {s}: error {err}");
        }
    }

    #[test]
    fn two_dimensional_map_preserves_scaled_mass() {
        let g = make_grid(2, 64, 8.0).unwrap();
        let f = bump(g, 0.3);
        let s = 1.4;
        let (r, _) = resample_affine(&f, [0.2, -0.4], s);
        let m = mass(&r) / (s * s);
        assert!((m - mass(&f)).abs() < 1e-10 * mass(&f));
    }

    #[test]
    fn compression_reports_lost_band() {
        let g = make_grid(1, 64, 8.0).unwrap();
        let f = Field::from_fn(g, |x| Complex64::from_polar((-x[0] * x[0]).exp(), 9.0 * x[0]));
        let (_, lost) = resample_affine(&f, [0.0, 0.0], 0.25);
        assert!(lost > 0.5);
    }
}

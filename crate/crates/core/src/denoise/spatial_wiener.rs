use super::box_mean;
use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Adaptive local Wiener filter.
///
/// Local mean and variance come from a `window x window` neighbourhood with
/// symmetric boundary; the noise power is the mean of all local variances.
pub fn spatial_wiener(image: &GrayImage, window: usize) -> Result<GrayImage> {
    if window < 3 || window % 2 == 0 {
        return Err(Error::InvalidSpec(format!(
            "Wiener window must be odd and >= 3, got {window}"
        )));
    }
    let (h, w) = image.dims();
    let x: Vec<f64> = image.data().iter().map(|&v| v as f64).collect();
    let x2: Vec<f64> = x.iter().map(|v| v * v).collect();
    let mean = box_mean(&x, h, w, window);
    let mean_sq = box_mean(&x2, h, w, window);
    let var: Vec<f64> = mean
        .iter()
        .zip(&mean_sq)
        .map(|(m, m2)| (m2 - m * m).max(0.0))
        .collect();
    let noise = var.iter().sum::<f64>() / var.len() as f64;
    let data = x
        .iter()
        .zip(mean.iter().zip(&var))
        .map(|(&v, (&m, &s2))| {
            let denom = s2.max(noise);
            let gain = if denom > 0.0 {
                (s2 - noise).max(0.0) / denom
            } else {
                0.0
            };
            (m + gain * (v - m)) as f32
        })
        .collect();
    GrayImage::new(h, w, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denoise::reflect;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_is_unchanged() {
        let img = GrayImage::filled(12, 10, 77.0);
        assert_eq!(spatial_wiener(&img, 3).unwrap(), img);
    }

    #[test]
    fn impulse_is_attenuated() {
        let mut img = GrayImage::filled(16, 16, 50.0);
        img.set(8, 8, 250.0);
        let out = spatial_wiener(&img, 3).unwrap();
        assert!(out.get(8, 8) < 250.0);
        assert!(out.get(8, 8) > 50.0);
    }

    #[test]
    fn matches_per_pixel_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let img = GrayImage::from_fn(16, 16, |_, _| rng.random_range(0.0..255.0f32).round());
        let out = spatial_wiener(&img, 3).unwrap();
        let (h, w) = img.dims();
        let mut mu = vec![0.0f64; h * w];
        let mut var = vec![0.0f64; h * w];
        for r in 0..h {
            for c in 0..w {
                let mut vals = Vec::new();
                for dy in -1isize..=1 {
                    for dx in -1isize..=1 {
                        vals.push(img.get(reflect(r as isize + dy, h), reflect(c as isize + dx, w)) as f64);
                    }
                }
                let m = vals.iter().sum::<f64>() / 9.0;
                let v = vals.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 9.0;
                mu[r * w + c] = m;
                var[r * w + c] = v;
            }
        }
        let nu = var.iter().sum::<f64>() / var.len() as f64;
        for i in 0..h * w {
            let x = img.data()[i] as f64;
            let expected = mu[i] + (var[i] - nu).max(0.0) / var[i].max(nu) * (x - mu[i]);
            assert!((out.data()[i] as f64 - expected).abs() < 1e-3, "pixel {i}");
        }
    }

    #[test]
    fn rejects_even_window() {
        let img = GrayImage::filled(8, 8, 1.0);
        assert!(spatial_wiener(&img, 4).is_err());
        assert!(spatial_wiener(&img, 1).is_err());
    }
}

//! Minimal iterative radix-2 FFT, enough for periodograms and fast
//! autocovariances of chain series.

/// In-place complex FFT (inverse when `inverse`), length must be a power of
/// two. Inverse includes the 1/n scaling.
pub(crate) fn fft(re: &mut [f64], im: &mut [f64], inverse: bool) {
    let n = re.len();
    assert_eq!(n, im.len());
    assert!(n.is_power_of_two(), "fft length must be a power of two");
    if n <= 1 {
        return;
    }

    // bit-reversal permutation
    let mut j = 0usize;
    for i in 0..n - 1 {
        if i < j {
            re.swap(i, j);
            im.swap(i, j);
        }
        let mut mask = n >> 1;
        while j & mask != 0 {
            j &= !mask;
            mask >>= 1;
        }
        j |= mask;
    }

    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * std::f64::consts::PI / len as f64;
        let (wr, wi) = (ang.cos(), ang.sin());
        let mut i = 0;
        while i < n {
            let (mut cr, mut ci) = (1.0f64, 0.0f64);
            for k in 0..len / 2 {
                let (ar, ai) = (re[i + k], im[i + k]);
                let (br, bi) = (re[i + k + len / 2], im[i + k + len / 2]);
                let (tr, ti) = (br * cr - bi * ci, br * ci + bi * cr);
                re[i + k] = ar + tr;
                im[i + k] = ai + ti;
                re[i + k + len / 2] = ar - tr;
                im[i + k + len / 2] = ai - ti;
                let ncr = cr * wr - ci * wi;
                ci = cr * wi + ci * wr;
                cr = ncr;
            }
            i += len;
        }
        len <<= 1;
    }
    if inverse {
        let inv = 1.0 / n as f64;
        for v in re.iter_mut() {
            *v *= inv;
        }
        for v in im.iter_mut() {
            *v *= inv;
        }
    }
}

/// Biased autocovariance estimates c_0..c_{max_lag} via FFT.
pub(crate) fn autocovariance(series: &[f64], max_lag: usize) -> Vec<f64> {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let m = (2 * n).next_power_of_two();
    let mut re = vec![0.0; m];
    let mut im = vec![0.0; m];
    for (i, &v) in series.iter().enumerate() {
        re[i] = v - mean;
    }
    fft(&mut re, &mut im, false);
    for i in 0..m {
        let p = re[i] * re[i] + im[i] * im[i];
        re[i] = p;
        im[i] = 0.0;
    }
    fft(&mut re, &mut im, true);
    (0..=max_lag.min(n - 1)).map(|t| re[t] / n as f64).collect()
}

/// Power at the positive-frequency bins k = 0..n/2 of a mean-removed series.
pub(crate) fn periodogram(series: &[f64]) -> Vec<f64> {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let m = n.next_power_of_two();
    let mut re = vec![0.0; m];
    let mut im = vec![0.0; m];
    for (i, &v) in series.iter().enumerate() {
        re[i] = v - mean;
    }
    fft(&mut re, &mut im, false);
    (0..=m / 2).map(|k| re[k] * re[k] + im[k] * im[k]).collect()
}

/// Effective FFT length used by [`periodogram`] for a series of length n.
pub(crate) fn padded_len(n: usize) -> usize {
    n.next_power_of_two()
}

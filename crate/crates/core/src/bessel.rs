//! Bessel functions of the first kind for integer order and real argument.

/// `J_0(x), …, J_{n_max}(x)` by Miller's backward recurrence, normalized
/// with `J_0 + 2 Σ_k J_{2k} = 1`. Negative `x` uses `J_n(−x) = (−1)^n J_n(x)`.
pub fn bessel_j_all(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = n_max.max(ax.ceil() as usize);
    // start far enough above both n and x that the seeded error has decayed
    let mut start = top + 20 + (40.0 * top as f64).sqrt() as usize;
    start += start % 2;

    let (mut j_next, mut j_cur) = (0.0_f64, 1e-300_f64);
    let mut norm = 0.0;
    for k in (0..start).rev() {
        // j_cur = J_{k+1}; step down to J_k
        let j_k = 2.0 * (k + 1) as f64 / ax * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_k;
        if k <= n_max {
            out[k] = j_k;
        }
        if k % 2 == 0 {
            norm += if k == 0 { j_k } else { 2.0 * j_k };
        }
        if j_cur.abs() > 1e250 {
            let s = 1e-250;
            j_cur *= s;
            j_next *= s;
            norm *= s;
            for v in out.iter_mut().skip(k) {
                *v *= s;
            }
        }
    }
    for (n, v) in out.iter_mut().enumerate() {
        *v /= norm;
        if x < 0.0 && n % 2 == 1 {
            *v = -*v;
        }
    }
    out
}

/// `J_n(x)` for integer `n` (negative orders via `J_{−n} = (−1)^n J_n`).
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let m = n.unsigned_abs() as usize;
    let v = bessel_j_all(m, x)[m];
    if n < 0 && m % 2 == 1 {
        -v
    } else {
        v
    }
}

//! Small summary statistics shared across modules. Variances are unbiased (n - 1).

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn standardize(xs: &[f64]) -> Option<Vec<f64>> {
    let m = mean(xs);
    let sd = variance(xs).sqrt();
    if !(sd > 0.0) || !sd.is_finite() {
        return None;
    }
    Some(xs.iter().map(|x| (x - m) / sd).collect())
}

pub fn median(xs: &mut [f64]) -> f64 {
    let n = xs.len();
    xs.sort_by(f64::total_cmp);
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variance_unbiased() {
        assert_eq!(variance(&[1.0, 2.0, 3.0]), 1.0);
        assert_eq!(variance(&[4.0]), 0.0);
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}

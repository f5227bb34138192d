use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Forward differences of order 0..=2 plus the values needed to undo them.
#[derive(Debug, Clone, PartialEq)]
pub struct Differenced {
    pub order: usize,
    /// First value of each intermediate level, outermost first.
    pub initials: Vec<f64>,
    pub deltas: Vec<f64>,
}

pub fn difference(values: &[f64], order: usize) -> Result<Differenced> {
    if order > 2 {
        return Err(Error::UnsupportedOrder(order));
    }
    if values.len() <= order {
        return Err(Error::InsufficientData {
            needed: order + 1,
            available: values.len(),
        });
    }
    let mut level = values.to_vec();
    let mut initials = Vec::with_capacity(order);
    for _ in 0..order {
        initials.push(level[0]);
        level = level.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(Differenced {
        order,
        initials,
        deltas: level,
    })
}

pub fn difference_series(s: &TimeSeries, order: usize) -> Result<Differenced> {
    difference(&s.dense()?, order)
}

/// Running sums, innermost level first.
pub fn undifference(d: &Differenced) -> Vec<f64> {
    let mut level = d.deltas.clone();
    for &start in d.initials.iter().rev() {
        let mut out = Vec::with_capacity(level.len() + 1);
        let mut acc = start;
        out.push(acc);
        for delta in &level {
            acc += delta;
            out.push(acc);
        }
        level = out;
    }
    level
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn order_zero_is_identity() {
        let d = difference(&[1.0, 5.0, 2.0], 0).unwrap();
        assert_eq!(d.deltas, vec![1.0, 5.0, 2.0]);
        assert_eq!(undifference(&d), vec![1.0, 5.0, 2.0]);
    }

    #[test]
    fn textbook_first_differences() {
        let d = difference(&[1.0, 3.0, 6.0, 10.0], 1).unwrap();
        assert_eq!(d.deltas, vec![2.0, 3.0, 4.0]);
        let d2 = difference(&[1.0, 3.0, 6.0, 10.0], 2).unwrap();
        assert_eq!(d2.deltas, vec![1.0, 1.0]);
    }

    #[test]
    fn rejects_unsupported_and_short() {
        assert!(matches!(
            difference(&[1.0; 10], 3),
            Err(Error::UnsupportedOrder(3))
        ));
        assert!(matches!(
            difference(&[1.0, 2.0], 2),
            Err(Error::InsufficientData { .. })
        ));
    }

    proptest! {
        // Integer-valued samples keep every subtraction and sum exact, so
        // the telescoping reconstruction is bit-for-bit.
        #[test]
        fn round_trip_bit_exact_on_integer_readings(
            order in 0usize..=2,
            raw in prop::collection::vec(0u32..1_000_000, 3..200),
        ) {
            let v: Vec<f64> = raw.iter().map(|&x| f64::from(x)).collect();
            let back = undifference(&difference(&v, order).unwrap());
            let a: Vec<u64> = back.iter().map(|x| x.to_bits()).collect();
            let b: Vec<u64> = v.iter().map(|x| x.to_bits()).collect();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn round_trip_close_on_reals(
            order in 0usize..=2,
            v in prop::collection::vec(0.0f64..1e4, 3..200),
        ) {
            let back = undifference(&difference(&v, order).unwrap());
            for (a, b) in back.iter().zip(&v) {
                prop_assert!((a - b).abs() <= 1e-9 * 1e4);
            }
        }
    }
}

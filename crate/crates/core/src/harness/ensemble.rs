use super::HarnessError;

/// Mean of the modality probabilities that are present.
pub fn ensemble_combine(text: Option<f64>, image: Option<f64>) -> Result<f64, HarnessError> {
    match (text, image) {
        (Some(t), Some(i)) => Ok((t + i) / 2.0),
        (Some(p), None) | (None, Some(p)) => Ok(p),
        (None, None) => Err(HarnessError::NoProbability),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fixtures() {
        assert!((ensemble_combine(Some(0.8), Some(0.6)).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(ensemble_combine(Some(0.3), None).unwrap(), 0.3);
        assert_eq!(ensemble_combine(None, Some(0.9)).unwrap(), 0.9);
        assert!(ensemble_combine(None, None).is_err());
    }

    proptest! {
        #[test]
        fn symmetric(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            prop_assert_eq!(ensemble_combine(Some(a), Some(b)).unwrap(), ensemble_combine(Some(b), Some(a)).unwrap());
        }
    }
}

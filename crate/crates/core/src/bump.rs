//! Shared smooth cutoff profiles.

/// Smooth transition equal to 1 at `s <= 0` and 0 at `s >= 1`, built from
/// the bump profile `exp(1 - 1/(1 - s^2))`.  All derivatives vanish at the
/// outer edge; the inner edge departs quadratically from the plateau.
pub fn smooth_transition(s: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// Radial low-pass profile: 1 on `|z| <= 1`, 0 on `|z| >= 2`, smooth bump
/// transition in between.
pub fn lowpass_profile(z: f64) -> f64 {
    smooth_transition(z.abs() - 1.0)
}

/// Compactly supported space bump: 1 at the center, 0 for `|s| >= 1`,
/// where `s` is the distance scaled by the support radius.
pub fn space_bump(s: f64) -> f64 {
    smooth_transition(s.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_support() {
        assert_eq!(lowpass_profile(0.3), 1.0);
        assert_eq!(lowpass_profile(-1.0), 1.0);
        assert_eq!(lowpass_profile(2.0), 0.0);
        assert_eq!(lowpass_profile(3.5), 0.0);
        let mid = lowpass_profile(1.5);
        assert!(mid > 0.0 && mid < 1.0);
    }

    #[test]
    fn transition_is_monotone_and_continuous_at_edges() {
        let mut prev = 1.0;
        for i in 0..=1000 {
            let s = i as f64 / 1000.0;
            let v = smooth_transition(s);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        assert!((smooth_transition(1e-9) - 1.0).abs() < 1e-6);
        assert!(smooth_transition(1.0 - 1e-9) < 1e-6);
    }
}

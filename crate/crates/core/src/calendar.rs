//! Signed-year arithmetic without a year 0 (1 BCE is -1, 1 CE is 1).

pub const MIN_YEAR: i32 = -5000;
pub const MAX_YEAR: i32 = 2100;

/// Year range covered by the physical slider and the browser slider.
pub const SLIDER_MIN_YEAR: i32 = -3500;
pub const SLIDER_MAX_YEAR: i32 = 2025;

/// Number of calendar years between `a` and `b`, skipping the missing year 0.
pub fn year_gap(a: i32, b: i32) -> u32 {
    let raw = (i64::from(a) - i64::from(b)).unsigned_abs();
    let straddles = (a < 0 && b > 0) || (a > 0 && b < 0);
    (if straddles { raw - 1 } else { raw }) as u32
}

/// Century of a year: 1..=100 is century 1, -100..=-1 is century -1.
pub fn century(year: i32) -> i32 {
    if year > 0 {
        (year - 1) / 100 + 1
    } else if year < 0 {
        -((-year - 1) / 100 + 1)
    } else {
        0
    }
}

pub fn format_year(year: i32) -> String {
    if year < 0 {
        format!("{} BCE", -year)
    } else {
        format!("{year} CE")
    }
}

/// Maps an astronomical result of 0 onto 1 BCE.
pub fn snap_year_zero(year: i32) -> i32 {
    if year == 0 {
        -1
    } else {
        year
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_skips_year_zero() {
        assert_eq!(year_gap(1, -1), 1);
        assert_eq!(year_gap(-1, 1), 1);
        assert_eq!(year_gap(10, 5), 5);
        assert_eq!(year_gap(-100, 100), 199);
        assert_eq!(year_gap(7, 7), 0);
    }

    #[test]
    fn centuries() {
        assert_eq!(century(1), 1);
        assert_eq!(century(100), 1);
        assert_eq!(century(101), 2);
        assert_eq!(century(1140), 12);
        assert_eq!(century(-1), -1);
        assert_eq!(century(-100), -1);
        assert_eq!(century(-101), -2);
    }
}

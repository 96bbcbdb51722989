//! Unit-cell frequency limits and the sizing report.
//!
//! A gyroid cell behaves as an effective medium only while it stays small
//! against the wavelength inside the host material. Measurements across cell
//! sizes put the usable limit at about 1.4 guided wavelengths per cell edge
//! (equivalently 0.7 per sub-unit), which this module turns into a predicted
//! maximum operating frequency and a per-cell-size report.

use crate::{Error, Result, SPEED_OF_LIGHT};

/// A frequency-like quantity that may exceed the measured band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandValue {
    /// Value resolved inside the band, Hz.
    Within(f64),
    /// Value beyond the band ceiling; carries the in-band lower bound, Hz.
    Exceeds(f64),
}

impl BandValue {
    /// The carried value in Hz regardless of marker.
    pub fn value(&self) -> f64 {
        match *self {
            BandValue::Within(v) | BandValue::Exceeds(v) => v,
        }
    }

    pub fn exceeds_band(&self) -> bool {
        matches!(self, BandValue::Exceeds(_))
    }

    /// Renders in GHz with one decimal, e.g. `25.1` or `> 40.0`.
    pub fn format_ghz(&self) -> String {
        match *self {
            BandValue::Within(v) => format!("{:.1}", v / 1e9),
            BandValue::Exceeds(v) => format!("> {:.1}", v / 1e9),
        }
    }
}

fn check_frequency(f: f64) -> Result<()> {
    if !(f > 0.0) {
        return Err(Error::Domain(format!("frequency must be positive, got {f}")));
    }
    Ok(())
}

fn check_eps_host(eps_host: f64) -> Result<()> {
    if !(eps_host >= 1.0) {
        return Err(Error::Domain(format!(
            "eps_host must be at least 1, got {eps_host}"
        )));
    }
    Ok(())
}

/// Wavelength inside the host dielectric: λg = (c/f)/√eps_host.
///
/// # Example
///
/// ```
/// let lg = gyrolens::sizing::guided_wavelength(20e9, 2.8).unwrap();
/// assert!((lg - 8.958e-3).abs() < 5e-6);
/// ```
pub fn guided_wavelength(f: f64, eps_host: f64) -> Result<f64> {
    check_frequency(f)?;
    check_eps_host(eps_host)?;
    Ok(SPEED_OF_LIGHT / f / eps_host.sqrt())
}

/// Cell size in guided wavelengths: l_uc / λg.
pub fn cell_ratio(l_uc: f64, f: f64, eps_host: f64) -> Result<f64> {
    if !(l_uc > 0.0) {
        return Err(Error::Domain(format!(
            "unit cell must be positive, got {l_uc}"
        )));
    }
    Ok(l_uc / guided_wavelength(f, eps_host)?)
}

/// Highest frequency at which a cell of edge `l_uc` still acts as an
/// effective medium: f = ratio_limit·c/(l_uc·√eps_host).
pub fn predict_f_max(l_uc: f64, eps_host: f64, ratio_limit: f64) -> Result<f64> {
    if !(l_uc > 0.0) {
        return Err(Error::Domain(format!(
            "unit cell must be positive, got {l_uc}"
        )));
    }
    if !(ratio_limit > 0.0) {
        return Err(Error::Domain(format!(
            "ratio_limit must be positive, got {ratio_limit}"
        )));
    }
    check_eps_host(eps_host)?;
    Ok(ratio_limit * SPEED_OF_LIGHT / (l_uc * eps_host.sqrt()))
}

/// Largest cell usable up to `f_required`; inverse of [`predict_f_max`].
pub fn max_cell_for_frequency(f_required: f64, eps_host: f64, ratio_limit: f64) -> Result<f64> {
    check_frequency(f_required)?;
    if !(ratio_limit > 0.0) {
        return Err(Error::Domain(format!(
            "ratio_limit must be positive, got {ratio_limit}"
        )));
    }
    check_eps_host(eps_host)?;
    Ok(ratio_limit * SPEED_OF_LIGHT / (f_required * eps_host.sqrt()))
}

/// Usable bandwidth above `band_start`. Frequencies past `band_ceiling`
/// cannot be measured, so an `f_max` beyond the ceiling reports the in-band
/// span as a lower bound. An `f_max` below `band_start` yields zero
/// bandwidth; callers should surface that as a warning.
pub fn bandwidth(f_max: f64, band_start: f64, band_ceiling: f64) -> Result<BandValue> {
    check_frequency(f_max)?;
    if !(band_start > 0.0 && band_start < band_ceiling) {
        return Err(Error::Domain(format!(
            "band must satisfy 0 < start < ceiling, got [{band_start}, {band_ceiling}]"
        )));
    }
    if f_max > band_ceiling {
        Ok(BandValue::Exceeds(band_ceiling - band_start))
    } else if f_max < band_start {
        Ok(BandValue::Within(0.0))
    } else {
        Ok(BandValue::Within(f_max - band_start))
    }
}

/// One row of the sizing report: the frequency limit and wavelength context
/// for a single cell size.
#[derive(Debug, Clone, PartialEq)]
pub struct SizingReport {
    /// Cell edge, m.
    pub l_uc: f64,
    /// Predicted maximum operating frequency, capped at the band ceiling.
    pub f_max: BandValue,
    /// Usable span above the band start.
    pub bandwidth: BandValue,
    /// True when the predicted limit falls below the band start.
    pub below_band: bool,
    /// Free-space wavelength at the stated maximum frequency, m.
    pub lambda_m: f64,
    /// Guided wavelength at the stated maximum frequency, m.
    pub lambda_g: f64,
    /// Cell edge in guided wavelengths at the stated maximum frequency.
    pub ratio: f64,
}

impl SizingReport {
    /// Evaluates the frequency-limit rule for one cell size. The wavelength
    /// columns use the stated maximum frequency: the prediction itself, or
    /// the band ceiling when the prediction exceeds it (matching how an
    /// out-of-band limit would be reported from measurements).
    pub fn evaluate(
        l_uc: f64,
        eps_host: f64,
        ratio_limit: f64,
        band_start: f64,
        band_ceiling: f64,
    ) -> Result<Self> {
        let predicted = predict_f_max(l_uc, eps_host, ratio_limit)?;
        let bw = bandwidth(predicted, band_start, band_ceiling)?;
        let f_max = if predicted > band_ceiling {
            BandValue::Exceeds(band_ceiling)
        } else {
            BandValue::Within(predicted)
        };
        let stated_f = predicted.min(band_ceiling);
        let lambda_m = SPEED_OF_LIGHT / stated_f;
        let lambda_g = lambda_m / eps_host.sqrt();
        Ok(Self {
            l_uc,
            f_max,
            bandwidth: bw,
            below_band: predicted < band_start,
            lambda_m,
            lambda_g,
            ratio: l_uc / lambda_g,
        })
    }
}

/// Sizing rows for a list of cell sizes, with renderers for CSV and text.
#[derive(Debug, Clone)]
pub struct SizingTable {
    pub rows: Vec<SizingReport>,
    pub ratio_limit: f64,
}

/// Builds the report for each cell size in `cells` (meters).
pub fn sizing_table(
    cells: &[f64],
    eps_host: f64,
    ratio_limit: f64,
    band_start: f64,
    band_ceiling: f64,
) -> Result<SizingTable> {
    if cells.is_empty() {
        return Err(Error::Domain("no cell sizes given".into()));
    }
    let rows = cells
        .iter()
        .map(|&l| SizingReport::evaluate(l, eps_host, ratio_limit, band_start, band_ceiling))
        .collect::<Result<Vec<_>>>()?;
    Ok(SizingTable { rows, ratio_limit })
}

impl SizingTable {
    /// CSV rendering with columns `l_uc_mm,f_max_ghz,bandwidth_ghz,ratio`.
    /// Out-of-band values carry a `>` prefix.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("l_uc_mm,f_max_ghz,bandwidth_ghz,ratio\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{:.2},{},{},{:.2}\n",
                row.l_uc * 1e3,
                row.f_max.format_ghz().replace(' ', ""),
                row.bandwidth.format_ghz().replace(' ', ""),
                row.ratio
            ));
        }
        out
    }

    /// Aligned plain-text rendering with a guideline footnote.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:>9}  {:>11}  {:>11}  {:>10}  {:>10}  {:>8}\n",
            "l_uc", "f_max", "bandwidth", "lambda_m", "lambda_g", "l_uc/l_g"
        ));
        out.push_str(&format!(
            "{:>9}  {:>11}  {:>11}  {:>10}  {:>10}  {:>8}\n",
            "(mm)", "(GHz)", "(GHz)", "(mm)", "(mm)", ""
        ));
        for row in &self.rows {
            out.push_str(&format!(
                "{:>9.2}  {:>11}  {:>11}  {:>10.2}  {:>10.2}  {:>8.2}\n",
                row.l_uc * 1e3,
                row.f_max.format_ghz(),
                row.bandwidth.format_ghz(),
                row.lambda_m * 1e3,
                row.lambda_g * 1e3,
                row.ratio
            ));
            if row.below_band {
                out.push_str("           warning: predicted limit falls below the band start\n");
            }
        }
        out.push_str(&format!(
            "\nguideline: cells stop acting as an effective medium above ~{:.1} guided\n\
             wavelengths per edge; calibrated on Luneburg-profile lenses.\n",
            self.ratio_limit
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const GHZ: f64 = 1e9;
    const MM: f64 = 1e-3;

    #[test]
    fn guided_wavelength_reference_values() {
        let lg = guided_wavelength(20.0 * GHZ, 2.8).unwrap();
        assert!((lg - 8.958e-3).abs() < 5e-6, "20 GHz: {lg}");
        let lg = guided_wavelength(40.0 * GHZ, 2.8).unwrap();
        assert!((lg - 4.479e-3).abs() < 5e-6, "40 GHz: {lg}");
    }

    #[test]
    fn guided_wavelength_in_air_is_free_space() {
        let f = 30.0 * GHZ;
        assert_eq!(
            guided_wavelength(f, 1.0).unwrap(),
            crate::SPEED_OF_LIGHT / f
        );
    }

    #[test]
    fn guided_wavelength_rejects_bad_input() {
        assert!(guided_wavelength(0.0, 2.8).is_err());
        assert!(guided_wavelength(-1.0, 2.8).is_err());
        assert!(guided_wavelength(20.0 * GHZ, 0.5).is_err());
    }

    #[test]
    fn cell_ratio_matches_measured_table() {
        let cases = [
            (12.5 * MM, 20.0 * GHZ, 1.39),
            (10.0 * MM, 25.0 * GHZ, 1.39),
            (7.5 * MM, 33.0 * GHZ, 1.38),
            (5.0 * MM, 40.0 * GHZ, 1.11),
        ];
        for (l, f, expected) in cases {
            let ratio = cell_ratio(l, f, 2.8).unwrap();
            assert!(
                (ratio - expected).abs() <= 0.02 + 1e-9,
                "cell {} mm at {} GHz: ratio {ratio}, expected {expected} ± 0.02",
                l / MM,
                f / GHZ
            );
        }
    }

    #[test]
    fn predict_f_max_reference_values() {
        let cases = [
            (7.5 * MM, 33.4),
            (10.0 * MM, 25.1),
            (12.5 * MM, 20.1),
            (5.0 * MM, 50.2),
        ];
        for (l, expected_ghz) in cases {
            let f = predict_f_max(l, 2.8, 1.4).unwrap();
            assert!(
                (f / GHZ - expected_ghz).abs() < 0.05,
                "cell {} mm: {} GHz, expected {expected_ghz}",
                l / MM,
                f / GHZ
            );
        }
    }

    #[test]
    fn bandwidth_reference_values() {
        let band = (18.0 * GHZ, 40.0 * GHZ);
        assert_eq!(
            bandwidth(25.0 * GHZ, band.0, band.1).unwrap(),
            BandValue::Within(7.0 * GHZ)
        );
        assert_eq!(
            bandwidth(20.0 * GHZ, band.0, band.1).unwrap(),
            BandValue::Within(2.0 * GHZ)
        );
        assert_eq!(
            bandwidth(50.2 * GHZ, band.0, band.1).unwrap(),
            BandValue::Exceeds(22.0 * GHZ)
        );
    }

    #[test]
    fn bandwidth_below_band_is_zero() {
        let bw = bandwidth(15.0 * GHZ, 18.0 * GHZ, 40.0 * GHZ).unwrap();
        assert_eq!(bw, BandValue::Within(0.0));
    }

    #[test]
    fn bandwidth_rejects_inverted_band() {
        assert!(bandwidth(25.0 * GHZ, 40.0 * GHZ, 18.0 * GHZ).is_err());
    }

    #[test]
    fn band_value_formatting() {
        assert_eq!(BandValue::Within(25.08e9).format_ghz(), "25.1");
        assert_eq!(BandValue::Exceeds(40.0e9).format_ghz(), "> 40.0");
    }

    #[test]
    fn report_row_for_small_cell_caps_at_ceiling() {
        let row = SizingReport::evaluate(5.0 * MM, 2.8, 1.4, 18.0 * GHZ, 40.0 * GHZ).unwrap();
        assert!(row.f_max.exceeds_band());
        assert_eq!(row.f_max.value(), 40.0 * GHZ);
        assert_eq!(row.bandwidth, BandValue::Exceeds(22.0 * GHZ));
        // Ratio evaluated at the 40 GHz ceiling, like a band-limited
        // measurement would report it.
        assert!((row.ratio - 1.116).abs() < 5e-3, "ratio {}", row.ratio);
        assert!(!row.below_band);
    }

    #[test]
    fn report_row_invariants_hold_exactly() {
        let row = SizingReport::evaluate(10.0 * MM, 2.8, 1.4, 18.0 * GHZ, 40.0 * GHZ).unwrap();
        assert_eq!(row.lambda_g, row.lambda_m / 2.8f64.sqrt());
        assert_eq!(row.ratio, row.l_uc / row.lambda_g);
    }

    #[test]
    fn sub_unit_rule_gives_the_same_frequencies() {
        // 0.7 per sub-unit (half cell) is the same rule as 1.4 per full cell.
        let full = predict_f_max(10.0 * MM, 2.8, 1.4).unwrap();
        let sub = predict_f_max(5.0 * MM, 2.8, 0.7).unwrap();
        assert!((full - sub).abs() < 1e-6, "{full} vs {sub}");
    }

    #[test]
    fn table_renders_csv_and_text() {
        let table = sizing_table(
            &[5.0 * MM, 7.5 * MM, 10.0 * MM, 12.5 * MM],
            2.8,
            1.4,
            18.0 * GHZ,
            40.0 * GHZ,
        )
        .unwrap();
        let csv = table.to_csv();
        assert!(csv.starts_with("l_uc_mm,f_max_ghz,bandwidth_ghz,ratio\n"));
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.contains(">40.0"), "csv missing exceeds marker: {csv}");
        let text = table.to_text();
        assert!(text.contains("> 40.0"), "text missing exceeds marker");
        assert!(text.contains("Luneburg"), "text missing calibration note");
    }

    #[test]
    fn empty_cell_list_is_rejected() {
        assert!(sizing_table(&[], 2.8, 1.4, 18.0 * GHZ, 40.0 * GHZ).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_cell_size(l in 1e-3f64..5e-2, eps in 1.0f64..10.0, limit in 0.1f64..3.0) {
            let f = predict_f_max(l, eps, limit).unwrap();
            let back = max_cell_for_frequency(f, eps, limit).unwrap();
            prop_assert!((back - l).abs() <= 1e-12 * l, "round trip {l} → {f} → {back}");
        }

        #[test]
        fn ratio_at_predicted_limit_is_the_limit(l in 1e-3f64..5e-2, eps in 1.0f64..10.0) {
            let f = predict_f_max(l, eps, 1.4).unwrap();
            let ratio = cell_ratio(l, f, eps).unwrap();
            prop_assert!((ratio - 1.4).abs() < 1e-12, "ratio {ratio}");
        }
    }
}

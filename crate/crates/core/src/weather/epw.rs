//! EPW (EnergyPlus Weather) file parsing.
//!
//! An EPW file carries 8 header lines (LOCATION first) followed by one data
//! row per hour. Only the fields the simulator consumes are extracted; the
//! rest of each row is ignored. Typical-year files stitch months from
//! different calendar years, so every timestamp is rebased to the year of
//! the first data row to keep the series contiguous.

use chrono::{NaiveDate, NaiveDateTime};

use super::{WeatherError, WeatherSeries, WeatherTick};
use crate::scalar::Scalar;

const HEADER_LINES: usize = 8;
/// EPW data rows have 35 mandatory fields; trailing extensions are ignored.
const MIN_FIELDS: usize = 35;

const FIELD_YEAR: usize = 0;
const FIELD_MONTH: usize = 1;
const FIELD_DAY: usize = 2;
const FIELD_HOUR: usize = 3;
const FIELD_DRYBULB: usize = 6;
const FIELD_RH: usize = 8;
const FIELD_DIRECT_NORMAL: usize = 14;
const FIELD_DIFFUSE_HORIZONTAL: usize = 15;
const FIELD_WIND_DIRECTION: usize = 20;
const FIELD_WIND_SPEED: usize = 21;

/// Parses an EPW byte stream into an hourly [`WeatherSeries`].
///
/// EPW hours run 1..=24 and label the hour just ended; ticks are stamped at
/// the start of that hour, so hour 1 of Jan 1 becomes 00:00 Jan 1. A full
/// year parses to 8760 ticks (8784 with a leap day).
pub fn parse_epw<F: Scalar>(raw: &[u8]) -> Result<WeatherSeries<F>, WeatherError> {
    let text = String::from_utf8_lossy(raw);
    let mut lines = text.lines();

    let first = lines
        .next()
        .ok_or_else(|| WeatherError::MalformedHeader("empty input".into()))?;
    if !first.trim_start().to_ascii_uppercase().starts_with("LOCATION") {
        return Err(WeatherError::MalformedHeader(format!(
            "first line must begin with LOCATION, found {:?}",
            first.chars().take(30).collect::<String>()
        )));
    }
    for i in 1..HEADER_LINES {
        if lines.next().is_none() {
            return Err(WeatherError::MalformedHeader(format!(
                "file ends inside the header (line {})",
                i + 1
            )));
        }
    }

    let mut ticks: Vec<WeatherTick<F>> = Vec::with_capacity(8784);
    let mut base_year: Option<i32> = None;
    for (i, line) in lines.enumerate() {
        let row = HEADER_LINES + i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < MIN_FIELDS {
            return Err(WeatherError::ShortRow {
                row,
                need: MIN_FIELDS,
                got: fields.len(),
            });
        }

        let int = |field: usize| -> Result<i64, WeatherError> {
            fields[field]
                .trim()
                .parse::<i64>()
                .map_err(|_| WeatherError::NonNumericField {
                    row,
                    field,
                    value: fields[field].to_string(),
                })
        };
        let num = |field: usize| -> Result<F, WeatherError> {
            fields[field]
                .trim()
                .parse::<f64>()
                .map(F::of)
                .map_err(|_| WeatherError::NonNumericField {
                    row,
                    field,
                    value: fields[field].to_string(),
                })
        };

        let year = base_year.unwrap_or(int(FIELD_YEAR)? as i32);
        base_year = Some(year);
        let month = int(FIELD_MONTH)?;
        let day = int(FIELD_DAY)?;
        let hour = int(FIELD_HOUR)?;
        if !(1..=24).contains(&hour) {
            return Err(WeatherError::BadTimestamp {
                row,
                detail: format!("hour {hour} outside 1..=24"),
            });
        }
        let timestamp = make_timestamp(year, month, day, hour as u32 - 1)
            .ok_or_else(|| WeatherError::BadTimestamp {
                row,
                detail: format!("no such date {year}-{month:02}-{day:02}"),
            })?;

        ticks.push(
            WeatherTick {
                timestamp,
                drybulb_temp: num(FIELD_DRYBULB)?,
                relative_humidity: num(FIELD_RH)?,
                wind_speed: num(FIELD_WIND_SPEED)?,
                wind_direction: num(FIELD_WIND_DIRECTION)?,
                diffuse_solar: num(FIELD_DIFFUSE_HORIZONTAL)?,
                direct_solar: num(FIELD_DIRECT_NORMAL)?,
            }
            .sanitized(),
        );
    }

    WeatherSeries::new(3600, ticks)
}

fn make_timestamp(year: i32, month: i64, day: i64, hour: u32) -> Option<NaiveDateTime> {
    if !(1..=12).contains(&month) || !(1..=31).contains(&day) {
        return None;
    }
    // Typical-year files can include Feb 29 from a leap source year even
    // when rebased into a non-leap year; fold it onto Feb 28.
    let date = NaiveDate::from_ymd_opt(year, month as u32, day as u32).or_else(|| {
        if month == 2 && day == 29 {
            NaiveDate::from_ymd_opt(year, 2, 28)
        } else {
            None
        }
    })?;
    date.and_hms_opt(hour, 0, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> String {
        let mut s = String::from(
            "LOCATION,Testville,ST,USA,TMY3,724666,39.74,-104.85,-7.0,1650.0\n",
        );
        for line in [
            "DESIGN CONDITIONS,0",
            "TYPICAL/EXTREME PERIODS,0",
            "GROUND TEMPERATURES,0",
            "HOLIDAYS/DAYLIGHT SAVINGS,No,0,0,0",
            "COMMENTS 1,synthetic fixture",
            "COMMENTS 2,",
            "DATA PERIODS,1,1,Data,Sunday,1/1,12/31",
        ] {
            s.push_str(line);
            s.push('\n');
        }
        s
    }

    /// Builds a data row with the simulator-relevant fields filled in and
    /// every other mandatory field zeroed.
    fn row(
        year: i32,
        month: u32,
        day: u32,
        hour: u32,
        drybulb: f64,
        rh: f64,
        direct: f64,
        diffuse: f64,
        wind_dir: f64,
        wind_speed: f64,
    ) -> String {
        let mut fields = vec!["0".to_string(); 35];
        fields[FIELD_YEAR] = year.to_string();
        fields[FIELD_MONTH] = month.to_string();
        fields[FIELD_DAY] = day.to_string();
        fields[FIELD_HOUR] = hour.to_string();
        fields[4] = "0".into();
        fields[FIELD_DRYBULB] = drybulb.to_string();
        fields[FIELD_RH] = rh.to_string();
        fields[FIELD_DIRECT_NORMAL] = direct.to_string();
        fields[FIELD_DIFFUSE_HORIZONTAL] = diffuse.to_string();
        fields[FIELD_WIND_DIRECTION] = wind_dir.to_string();
        fields[FIELD_WIND_SPEED] = wind_speed.to_string();
        fields.join(",")
    }

    #[test]
    fn parses_fixture_rows_field_by_field() {
        let mut text = header();
        text.push_str(&row(2002, 1, 1, 1, 21.7, 34.9, 850.0, 120.0, 225.0, 4.2));
        text.push('\n');
        text.push_str(&row(2002, 1, 1, 2, 20.3, 36.0, 0.0, 0.0, 230.0, 3.8));
        text.push('\n');

        let series = parse_epw::<f64>(text.as_bytes()).unwrap();
        assert_eq!(series.len(), 2);
        assert_eq!(series.step_seconds, 3600);

        let t0 = &series.ticks[0];
        assert_eq!(t0.timestamp.format("%Y-%m-%d %H:%M").to_string(), "2002-01-01 00:00");
        assert_eq!(t0.drybulb_temp, 21.7);
        assert_eq!(t0.relative_humidity, 34.9);
        assert_eq!(t0.direct_solar, 850.0);
        assert_eq!(t0.diffuse_solar, 120.0);
        assert_eq!(t0.wind_direction, 225.0);
        assert_eq!(t0.wind_speed, 4.2);

        let t1 = &series.ticks[1];
        assert_eq!(t1.timestamp.format("%H:%M").to_string(), "01:00");
    }

    #[test]
    fn rebased_to_first_rows_year() {
        let mut text = header();
        // Typical-year files splice months from different source years.
        text.push_str(&row(1999, 1, 1, 1, 5.0, 50.0, 0.0, 0.0, 0.0, 0.0));
        text.push('\n');
        text.push_str(&row(2007, 1, 1, 2, 6.0, 50.0, 0.0, 0.0, 0.0, 0.0));
        text.push('\n');

        let series = parse_epw::<f64>(text.as_bytes()).unwrap();
        assert_eq!(series.ticks[0].timestamp.format("%Y").to_string(), "1999");
        assert_eq!(series.ticks[1].timestamp.format("%Y").to_string(), "1999");
    }

    #[test]
    fn hour_24_lands_on_same_day_23h() {
        let mut text = header();
        text.push_str(&row(2002, 3, 15, 24, 10.0, 50.0, 0.0, 0.0, 0.0, 0.0));
        text.push('\n');
        let series = parse_epw::<f64>(text.as_bytes()).unwrap();
        assert_eq!(
            series.ticks[0].timestamp.format("%m-%d %H:%M").to_string(),
            "03-15 23:00"
        );
    }

    #[test]
    fn missing_location_header_is_rejected() {
        let text = "DESIGN CONDITIONS,0\n";
        let err = parse_epw::<f64>(text.as_bytes()).unwrap_err();
        assert!(matches!(err, WeatherError::MalformedHeader(_)));
    }

    #[test]
    fn short_row_is_rejected_with_position() {
        let mut text = header();
        text.push_str("2002,1,1,1,0,0,21.7\n");
        let err = parse_epw::<f64>(text.as_bytes()).unwrap_err();
        match err {
            WeatherError::ShortRow { row, need, got } => {
                assert_eq!(row, 9);
                assert_eq!(need, 35);
                assert_eq!(got, 7);
            }
            other => panic!("expected ShortRow, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_field_is_rejected_with_position() {
        let mut text = header();
        let bad = row(2002, 1, 1, 1, 21.7, 34.9, 0.0, 0.0, 0.0, 0.0).replace("21.7", "n/a");
        text.push_str(&bad);
        text.push('\n');
        let err = parse_epw::<f64>(text.as_bytes()).unwrap_err();
        match err {
            WeatherError::NonNumericField { field, value, .. } => {
                assert_eq!(field, FIELD_DRYBULB);
                assert_eq!(value, "n/a");
            }
            other => panic!("expected NonNumericField, got {other:?}"),
        }
    }

    #[test]
    fn out_of_range_values_are_clamped() {
        let mut text = header();
        text.push_str(&row(2002, 1, 1, 1, 5.0, 120.0, -10.0, -5.0, 365.0, -1.0));
        text.push('\n');
        let series = parse_epw::<f64>(text.as_bytes()).unwrap();
        let t = &series.ticks[0];
        assert_eq!(t.relative_humidity, 100.0);
        assert_eq!(t.direct_solar, 0.0);
        assert_eq!(t.diffuse_solar, 0.0);
        assert_eq!(t.wind_direction, 5.0);
        assert_eq!(t.wind_speed, 0.0);
    }
}

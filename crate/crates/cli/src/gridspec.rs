//! Flag-grammar helpers: `start:stop:step` grids and comma-separated points.

use mfkrig::{range_grid, Error, Result};

/// Parse `start:stop:step` (inclusive start, exclusive stop) into grid points.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "grid spec '{spec}' is not of the form start:stop:step"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.trim().parse::<f64>().map_err(|_| {
                Error::InvalidArgument(format!("grid spec '{spec}': '{p}' is not a number"))
            })
        })
        .collect::<Result<_>>()?;
    range_grid(nums[0], nums[1], nums[2])
}

/// Parse a comma-separated list of points.
pub fn parse_points(list: &str) -> Result<Vec<f64>> {
    let points: Vec<f64> = list
        .split(',')
        .map(|p| {
            p.trim().parse::<f64>().map_err(|_| {
                Error::InvalidArgument(format!("point list '{list}': '{p}' is not a number"))
            })
        })
        .collect::<Result<_>>()?;
    if points.is_empty() {
        return Err(Error::InvalidArgument("empty point list".into()));
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec_is_start_inclusive_stop_exclusive() {
        let g = parse_grid("0:1:0.25").unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75]);
        assert_eq!(parse_grid("300:1500:25").unwrap().len(), 48);
    }

    #[test]
    fn bad_specs_are_rejected() {
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("a:b:c").is_err());
        assert!(parse_grid("1:1:1").is_err());
        assert!(parse_grid("0:1:-0.1").is_err());
    }

    #[test]
    fn point_lists_parse() {
        assert_eq!(parse_points("0, 0.4,0.6 ,1").unwrap(), vec![0.0, 0.4, 0.6, 1.0]);
        assert!(parse_points("0,x").is_err());
    }
}

use std::fmt::Write as _;

/// One optimizer iteration: unweighted term values (absent terms are `None`)
/// and the weighted total.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub stage: usize,
    pub chamfer: Option<f64>,
    pub image: Option<f64>,
    pub laplacian: Option<f64>,
    pub edge: Option<f64>,
    pub normal: Option<f64>,
    pub radar: Option<f64>,
    pub total: f64,
}

pub const TRACE_HEADER: &str = "iteration,stage,chamfer,image,laplacian,edge,normal,radar,total";

/// CSV with [`TRACE_HEADER`]; absent terms are empty fields.
pub fn trace_to_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{:e}",
            r.iteration,
            r.stage,
            opt(r.chamfer),
            opt(r.image),
            opt(r.laplacian),
            opt(r.edge),
            opt(r.normal),
            opt(r.radar),
            r.total
        );
    }
    out
}

/// Trailing moving average over `window` rows of the total loss.
pub fn smoothed_totals(rows: &[TraceRow], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(rows.len());
    let mut sum = 0.0;
    for (i, r) in rows.iter().enumerate() {
        sum += r.total;
        if i >= window {
            sum -= rows[i - window].total;
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(i: usize, total: f64) -> TraceRow {
        TraceRow {
            iteration: i,
            stage: 1,
            chamfer: Some(0.5),
            image: None,
            laplacian: None,
            edge: None,
            normal: None,
            radar: Some(0.25),
            total,
        }
    }

    #[test]
    fn csv_has_one_line_per_row() {
        let csv = trace_to_csv(&[row(0, 1.0), row(1, 0.5)]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "0,1,5e-1,,,,,2.5e-1,1e0");
        assert_eq!(lines[0].split(',').count(), lines[2].split(',').count());
    }

    #[test]
    fn moving_average() {
        let rows: Vec<TraceRow> = (0..5).map(|i| row(i, i as f64)).collect();
        assert_eq!(smoothed_totals(&rows, 2), vec![0.0, 0.5, 1.5, 2.5, 3.5]);
    }
}

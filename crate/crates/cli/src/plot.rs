//! Standalone SVG charts rendered from the CSV artifacts. The chart type is
//! inferred from the header row: training metrics become reward curves,
//! checkpoints become evaluation curves, cross-evaluation matrices become
//! grouped bars, traces become temperature plots with the comfort band, and
//! trade-off tables become paired weight curves. Rendering is a pure
//! function of the CSV bytes, so identical inputs give identical SVGs.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::commands::Ctx;
use crate::CliError;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 170.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
];

pub fn cmd_plot(ctx: &Ctx, inputs: &[PathBuf]) -> Result<(), CliError> {
    for input in inputs {
        let text = std::fs::read_to_string(input).map_err(|e| {
            CliError::Config(format!("cannot read {}: {e}", input.display()))
        })?;
        let table = Table::parse(&text)
            .map_err(|e| CliError::Config(format!("invalid CSV {}: {e}", input.display())))?;
        let title = input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "chart".to_string());
        let svg = render(&table, &title)
            .map_err(|e| CliError::Config(format!("cannot plot {}: {e}", input.display())))?;
        let out_path = input.with_extension("svg");
        std::fs::write(&out_path, svg).map_err(|e| {
            CliError::Runtime(format!("cannot write {}: {e}", out_path.display()))
        })?;
        if !ctx.quiet {
            println!("{}", out_path.display());
        }
    }
    Ok(())
}

#[derive(Debug)]
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        let header_line = lines.next().filter(|l| !l.is_empty()).ok_or("empty file")?;
        let header: Vec<String> = header_line.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let row: Vec<String> = line.split(',').map(str::to_string).collect();
            if row.len() != header.len() {
                return Err(format!(
                    "row {} has {} fields, header has {}",
                    i + 2,
                    row.len(),
                    header.len()
                ));
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err("no data rows".to_string());
        }
        Ok(Self { header, rows })
    }

    fn col(&self, name: &str) -> usize {
        self.header
            .iter()
            .position(|h| h == name)
            .expect("column was checked by the header dispatch")
    }

    fn num(&self, row: &[String], col: usize) -> Result<f64, String> {
        row[col]
            .parse()
            .map_err(|_| format!("{:?} in column {} is not a number", row[col], self.header[col]))
    }
}

fn render(table: &Table, title: &str) -> Result<String, String> {
    let header = table.header.join(",");
    match header.as_str() {
        "run_id,phase,episode,mean_reward,mean_power_w,comfort_violation_pct,mean_violation_degc" => {
            reward_curves(table, title)
        }
        "run_id,phase,after_episode,mean_eval_reward,retained" => checkpoint_curves(table, title),
        "train_climate,eval_climate,mean_reward,sd_reward" => grouped_bars(table, title),
        "step,datetime,outdoor_c,zone,zone_temp_c,heating_sp,cooling_sp,power_w,reward,comfort_low,comfort_high" => {
            temperature_trace(table, title)
        }
        "omega,mean_reward,sd_reward,mean_power_w,comfort_violation_pct,mean_violation_degc" => {
            tradeoff_curves(table, title)
        }
        other => Err(format!("unrecognized CSV header {other:?}")),
    }
}

/// Maps a data interval onto a pixel interval.
#[derive(Clone, Copy)]
struct Scale {
    dmin: f64,
    dmax: f64,
    rmin: f64,
    rmax: f64,
}

impl Scale {
    fn new(dmin: f64, dmax: f64, rmin: f64, rmax: f64) -> Self {
        let (dmin, dmax) = if (dmax - dmin).abs() < 1e-12 {
            (dmin - 1.0, dmax + 1.0)
        } else {
            (dmin, dmax)
        };
        Self {
            dmin,
            dmax,
            rmin,
            rmax,
        }
    }

    fn padded(dmin: f64, dmax: f64, rmin: f64, rmax: f64) -> Self {
        let span = (dmax - dmin).abs().max(1e-12);
        Self::new(dmin - 0.05 * span, dmax + 0.05 * span, rmin, rmax)
    }

    fn map(&self, v: f64) -> f64 {
        self.rmin + (v - self.dmin) / (self.dmax - self.dmin) * (self.rmax - self.rmin)
    }

    /// Round tick positions covering the data interval: a step of
    /// 1, 2, or 5 times a power of ten.
    fn ticks(&self) -> Vec<f64> {
        let span = self.dmax - self.dmin;
        let raw = span / 5.0;
        let mag = 10f64.powf(raw.abs().log10().floor());
        let norm = raw / mag;
        let step = if norm < 1.5 {
            mag
        } else if norm < 3.5 {
            2.0 * mag
        } else if norm < 7.5 {
            5.0 * mag
        } else {
            10.0 * mag
        };
        let mut ticks = Vec::new();
        let mut v = (self.dmin / step).ceil() * step;
        while v <= self.dmax + 1e-9 * step {
            // Snap near-zero ticks so labels read 0 rather than 1e-17.
            ticks.push(if v.abs() < step * 1e-6 { 0.0 } else { v });
            v += step;
        }
        ticks
    }
}

fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let s = if v.abs() >= 1000.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    };
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Canvas {
    body: String,
}

impl Canvas {
    fn new() -> Self {
        let mut body = String::new();
        writeln!(
            body,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"monospace\">"
        )
        .unwrap();
        writeln!(body, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>").unwrap();
        Self { body }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64, dash: Option<&str>) {
        let dash = dash.map_or(String::new(), |d| format!(" stroke-dasharray=\"{d}\""));
        writeln!(
            self.body,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{stroke}\" stroke-width=\"{width}\"{dash}/>",
            x1, y1, x2, y2
        )
        .unwrap();
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64, dash: Option<&str>) {
        if pts.is_empty() {
            return;
        }
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let dash = dash.map_or(String::new(), |d| format!(" stroke-dasharray=\"{d}\""));
        writeln!(
            self.body,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width}\"{dash}/>",
            coords.join(" ")
        )
        .unwrap();
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        writeln!(
            self.body,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r}\" fill=\"{fill}\"/>"
        )
        .unwrap();
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        writeln!(
            self.body,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{fill}\"/>"
        )
        .unwrap();
    }

    fn text(&mut self, x: f64, y: f64, size: u32, anchor: &str, content: &str) {
        writeln!(
            self.body,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" font-size=\"{size}\" text-anchor=\"{anchor}\" fill=\"#333333\">{}</text>",
            escape(content)
        )
        .unwrap();
    }

    fn title(&mut self, content: &str) {
        self.text(MARGIN_L, 24.0, 14, "start", content);
    }

    /// Axes, gridlines, and tick labels for the plot area.
    fn axes(&mut self, xs: &Scale, ys: &Scale, x_label: &str, y_label: &str) {
        let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
        let (y0, y1) = (HEIGHT - MARGIN_B, MARGIN_T);
        for t in ys.ticks() {
            let y = ys.map(t);
            self.line(x0, y, x1, y, "#dddddd", 1.0, None);
            self.text(x0 - 6.0, y + 4.0, 11, "end", &fmt_num(t));
        }
        for t in xs.ticks() {
            let x = xs.map(t);
            self.line(x, y0, x, y1, "#eeeeee", 1.0, None);
            self.text(x, y0 + 16.0, 11, "middle", &fmt_num(t));
        }
        self.line(x0, y0, x1, y0, "#333333", 1.0, None);
        self.line(x0, y0, x0, y1, "#333333", 1.0, None);
        self.text((x0 + x1) / 2.0, HEIGHT - 12.0, 12, "middle", x_label);
        self.text(14.0, MARGIN_T - 10.0, 12, "start", y_label);
    }

    fn legend(&mut self, entries: &[(String, &str, Option<&str>)]) {
        let x = WIDTH - MARGIN_R + 12.0;
        for (i, (label, color, dash)) in entries.iter().enumerate() {
            let y = MARGIN_T + 14.0 + 18.0 * i as f64;
            self.line(x, y - 4.0, x + 22.0, y - 4.0, color, 2.0, *dash);
            self.text(x + 28.0, y, 11, "start", label);
        }
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn plot_area_x() -> (f64, f64) {
    (MARGIN_L, WIDTH - MARGIN_R)
}

fn plot_area_y() -> (f64, f64) {
    (HEIGHT - MARGIN_B, MARGIN_T)
}

/// Per-(run, phase) series of one numeric column, in first-seen order.
fn series_by_group(
    table: &Table,
    key_cols: &[usize],
    x_col: Option<usize>,
    y_col: usize,
) -> Result<Vec<(String, Vec<(f64, f64)>)>, String> {
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for row in &table.rows {
        let key = key_cols
            .iter()
            .map(|&c| row[c].as_str())
            .collect::<Vec<_>>()
            .join(" ");
        let y = table.num(row, y_col)?;
        let x = match x_col {
            Some(c) => table.num(row, c)?,
            None => 0.0,
        };
        match series.iter_mut().find(|(k, _)| *k == key) {
            Some((_, pts)) => pts.push((x, y)),
            None => series.push((key, vec![(x, y)])),
        }
    }
    if x_col.is_none() {
        for (_, pts) in series.iter_mut() {
            for (i, p) in pts.iter_mut().enumerate() {
                p.0 = (i + 1) as f64;
            }
        }
    }
    Ok(series)
}

fn bounds(series: &[(String, Vec<(f64, f64)>)]) -> (f64, f64, f64, f64) {
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for (_, pts) in series {
        for &(x, y) in pts {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
    }
    (xmin, xmax, ymin, ymax)
}

fn line_chart(
    series: &[(String, Vec<(f64, f64)>)],
    title: &str,
    x_label: &str,
    y_label: &str,
    markers: bool,
) -> String {
    let (xmin, xmax, ymin, ymax) = bounds(series);
    let (rx0, rx1) = plot_area_x();
    let (ry0, ry1) = plot_area_y();
    let xs = Scale::new(xmin, xmax, rx0, rx1);
    let ys = Scale::padded(ymin, ymax, ry0, ry1);
    let mut canvas = Canvas::new();
    canvas.title(title);
    canvas.axes(&xs, &ys, x_label, y_label);
    let mut legend = Vec::new();
    for (i, (key, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mapped: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (xs.map(x), ys.map(y))).collect();
        canvas.polyline(&mapped, color, 1.5, None);
        if markers {
            for &(x, y) in &mapped {
                canvas.circle(x, y, 2.5, color);
            }
        }
        legend.push((key.clone(), color, None));
    }
    canvas.legend(&legend);
    canvas.finish()
}

fn reward_curves(table: &Table, title: &str) -> Result<String, String> {
    let series = series_by_group(
        table,
        &[table.col("run_id"), table.col("phase")],
        Some(table.col("episode")),
        table.col("mean_reward"),
    )?;
    Ok(line_chart(&series, title, "episode", "mean reward", false))
}

fn checkpoint_curves(table: &Table, title: &str) -> Result<String, String> {
    let series = series_by_group(
        table,
        &[table.col("run_id"), table.col("phase")],
        Some(table.col("after_episode")),
        table.col("mean_eval_reward"),
    )?;
    Ok(line_chart(&series, title, "episode", "mean eval reward", true))
}

fn grouped_bars(table: &Table, title: &str) -> Result<String, String> {
    let train_col = table.col("train_climate");
    let eval_col = table.col("eval_climate");
    let reward_col = table.col("mean_reward");
    let mut groups: Vec<String> = Vec::new();
    let mut bars: Vec<String> = Vec::new();
    let mut values: Vec<(usize, usize, f64)> = Vec::new();
    for row in &table.rows {
        let eval = row[eval_col].clone();
        let train = row[train_col].clone();
        let g = match groups.iter().position(|v| *v == eval) {
            Some(i) => i,
            None => {
                groups.push(eval);
                groups.len() - 1
            }
        };
        let b = match bars.iter().position(|v| *v == train) {
            Some(i) => i,
            None => {
                bars.push(train);
                bars.len() - 1
            }
        };
        values.push((g, b, table.num(row, reward_col)?));
    }
    let ymin = values.iter().map(|v| v.2).fold(0.0f64, f64::min);
    let ymax = values.iter().map(|v| v.2).fold(0.0f64, f64::max);
    let (rx0, rx1) = plot_area_x();
    let (ry0, ry1) = plot_area_y();
    let ys = Scale::padded(ymin, ymax, ry0, ry1);
    let mut canvas = Canvas::new();
    canvas.title(title);
    canvas.axes(
        &Scale::new(0.0, 1.0, rx0, rx1),
        &ys,
        "evaluation climate",
        "mean reward",
    );
    // The x axis is categorical; cover the numeric tick labels drawn by
    // axes() with a white band before writing the group names.
    canvas.rect(rx0 + 1.0, ry0 + 4.0, rx1 - rx0, 18.0, "#ffffff");
    let group_w = (rx1 - rx0) / groups.len() as f64;
    let bar_w = group_w * 0.8 / bars.len() as f64;
    let y_zero = ys.map(0.0);
    for &(g, b, v) in &values {
        let x = rx0 + group_w * g as f64 + group_w * 0.1 + bar_w * b as f64;
        let y = ys.map(v);
        let (top, h) = if v >= 0.0 {
            (y, y_zero - y)
        } else {
            (y_zero, y - y_zero)
        };
        canvas.rect(x, top, bar_w.max(1.0) - 1.0, h.max(0.5), PALETTE[b % PALETTE.len()]);
    }
    for (g, name) in groups.iter().enumerate() {
        let x = rx0 + group_w * (g as f64 + 0.5);
        canvas.text(x, ry0 + 16.0, 11, "middle", name);
    }
    canvas.line(rx0, y_zero, rx1, y_zero, "#333333", 1.0, None);
    let legend: Vec<(String, &str, Option<&str>)> = bars
        .iter()
        .enumerate()
        .map(|(b, name)| (format!("trained on {name}"), PALETTE[b % PALETTE.len()], None))
        .collect();
    canvas.legend(&legend);
    Ok(canvas.finish())
}

fn temperature_trace(table: &Table, title: &str) -> Result<String, String> {
    let step_col = table.col("step");
    let zone_col = table.col("zone");
    let temp_col = table.col("zone_temp_c");
    let out_col = table.col("outdoor_c");
    let lo_col = table.col("comfort_low");
    let hi_col = table.col("comfort_high");
    let mut zones: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    let mut outdoor: Vec<(f64, f64)> = Vec::new();
    let mut low: Vec<(f64, f64)> = Vec::new();
    let mut high: Vec<(f64, f64)> = Vec::new();
    let mut last_step = f64::NEG_INFINITY;
    for row in &table.rows {
        let step = table.num(row, step_col)?;
        let temp = table.num(row, temp_col)?;
        let zone = row[zone_col].clone();
        match zones.iter_mut().find(|(k, _)| *k == zone) {
            Some((_, pts)) => pts.push((step, temp)),
            None => zones.push((zone, vec![(step, temp)])),
        }
        if step > last_step {
            outdoor.push((step, table.num(row, out_col)?));
            low.push((step, table.num(row, lo_col)?));
            high.push((step, table.num(row, hi_col)?));
            last_step = step;
        }
    }
    let mut all = zones.clone();
    all.push(("outdoor".to_string(), outdoor.clone()));
    all.push(("low".to_string(), low.clone()));
    all.push(("high".to_string(), high.clone()));
    let (xmin, xmax, ymin, ymax) = bounds(&all);
    let (rx0, rx1) = plot_area_x();
    let (ry0, ry1) = plot_area_y();
    let xs = Scale::new(xmin, xmax, rx0, rx1);
    let ys = Scale::padded(ymin, ymax, ry0, ry1);
    let mut canvas = Canvas::new();
    canvas.title(title);
    canvas.axes(&xs, &ys, "step", "temperature (degC)");
    let mut legend: Vec<(String, &str, Option<&str>)> = Vec::new();
    let map = |pts: &[(f64, f64)]| -> Vec<(f64, f64)> {
        pts.iter().map(|&(x, y)| (xs.map(x), ys.map(y))).collect()
    };
    canvas.polyline(&map(&outdoor), "#999999", 1.0, None);
    legend.push(("outdoor".to_string(), "#999999", None));
    for (i, (zone, pts)) in zones.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        canvas.polyline(&map(pts), color, 1.5, None);
        legend.push((zone.clone(), color, None));
    }
    canvas.polyline(&map(&low), "#333333", 1.0, Some("6 4"));
    canvas.polyline(&map(&high), "#333333", 1.0, Some("6 4"));
    legend.push(("comfort band".to_string(), "#333333", Some("6 4")));
    canvas.legend(&legend);
    Ok(canvas.finish())
}

fn tradeoff_curves(table: &Table, title: &str) -> Result<String, String> {
    let omega_col = table.col("omega");
    let power_col = table.col("mean_power_w");
    let viol_col = table.col("comfort_violation_pct");
    let mut power: Vec<(f64, f64)> = Vec::new();
    let mut viol: Vec<(f64, f64)> = Vec::new();
    for row in &table.rows {
        let omega = table.num(row, omega_col)?;
        power.push((omega, table.num(row, power_col)?));
        viol.push((omega, table.num(row, viol_col)?));
    }
    // Two panels sharing the omega axis: power on the left, violations on
    // the right.
    let mut canvas = Canvas::new();
    canvas.title(title);
    let mid = WIDTH / 2.0;
    let panels = [
        (MARGIN_L, mid - 30.0, &power, "mean power (W)"),
        (mid + 50.0, WIDTH - 30.0, &viol, "comfort violations (% steps)"),
    ];
    let (ry0, ry1) = plot_area_y();
    for (i, (x0, x1, pts, label)) in panels.iter().enumerate() {
        let (xmin, xmax, _, _) = bounds(&[("".to_string(), (*pts).clone())]);
        let ymin = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let ymax = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let xs = Scale::padded(xmin, xmax, *x0, *x1);
        let ys = Scale::padded(ymin, ymax, ry0, ry1);
        for t in ys.ticks() {
            let y = ys.map(t);
            canvas.line(*x0, y, *x1, y, "#dddddd", 1.0, None);
            canvas.text(x0 - 6.0, y + 4.0, 11, "end", &fmt_num(t));
        }
        for t in xs.ticks() {
            let x = xs.map(t);
            canvas.text(x, ry0 + 16.0, 11, "middle", &fmt_num(t));
        }
        canvas.line(*x0, ry0, *x1, ry0, "#333333", 1.0, None);
        canvas.line(*x0, ry0, *x0, ry1, "#333333", 1.0, None);
        canvas.text((*x0 + *x1) / 2.0, HEIGHT - 12.0, 12, "middle", "comfort weight");
        canvas.text(*x0, MARGIN_T - 10.0, 12, "start", label);
        let color = PALETTE[i];
        let mapped: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (xs.map(x), ys.map(y))).collect();
        canvas.polyline(&mapped, color, 1.5, None);
        for &(x, y) in &mapped {
            canvas.circle(x, y, 3.0, color);
        }
    }
    Ok(canvas.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    const METRICS: &str = "run_id,phase,episode,mean_reward,mean_power_w,comfort_violation_pct,mean_violation_degc\n\
                           r1,train,1,-2,1500,10,0.2\n\
                           r1,train,2,-1,1400,8,0.1\n";

    #[test]
    fn header_dispatch_covers_every_artifact() {
        let metrics = Table::parse(METRICS).unwrap();
        assert!(render(&metrics, "t").unwrap().starts_with("<svg"));

        let checkpoints = Table::parse(
            "run_id,phase,after_episode,mean_eval_reward,retained\nr1,train,4,-1.5,true\n",
        )
        .unwrap();
        assert!(render(&checkpoints, "t").unwrap().contains("circle"));

        let crosseval = Table::parse(
            "train_climate,eval_climate,mean_reward,sd_reward\ncool,cool,-1,0\nhot,cool,-2,0\n",
        )
        .unwrap();
        assert!(render(&crosseval, "t").unwrap().contains("rect"));

        let trace = Table::parse(
            "step,datetime,outdoor_c,zone,zone_temp_c,heating_sp,cooling_sp,power_w,reward,comfort_low,comfort_high\n\
             0,2021-07-01T00:00,30,core,24,20,23.5,2000,-0.2,23,26\n\
             1,2021-07-01T00:15,30,core,24.1,20,23.5,2000,-0.2,23,26\n",
        )
        .unwrap();
        assert!(render(&trace, "t").unwrap().contains("stroke-dasharray"));

        let tradeoff = Table::parse(
            "omega,mean_reward,sd_reward,mean_power_w,comfort_violation_pct,mean_violation_degc\n\
             0.25,-1,0,1500,12,0.2\n0.75,-2,0,1100,6,0.1\n",
        )
        .unwrap();
        assert!(render(&tradeoff, "t").unwrap().contains("comfort weight"));
    }

    #[test]
    fn unknown_header_is_rejected() {
        let table = Table::parse("a,b\n1,2\n").unwrap();
        let err = render(&table, "t").unwrap_err();
        assert!(err.contains("unrecognized"));
    }

    #[test]
    fn empty_and_header_only_files_are_rejected() {
        assert!(Table::parse("").is_err());
        assert!(Table::parse("a,b\n").is_err());
    }

    #[test]
    fn ragged_rows_are_rejected_with_the_row_number() {
        let err = Table::parse("a,b\n1,2\n3\n").unwrap_err();
        assert!(err.contains("row 3"), "{err}");
    }

    #[test]
    fn rendering_is_deterministic() {
        let table = Table::parse(METRICS).unwrap();
        assert_eq!(render(&table, "t").unwrap(), render(&table, "t").unwrap());
    }

    #[test]
    fn tick_steps_are_round_numbers() {
        let s = Scale::new(0.0, 672.0, 0.0, 100.0);
        let ticks = s.ticks();
        assert!(ticks.contains(&0.0));
        assert!(ticks.contains(&200.0));
        let s = Scale::new(-2.3, -0.1, 0.0, 100.0);
        for pair in s.ticks().windows(2) {
            assert!((pair[1] - pair[0] - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn numbers_format_without_trailing_zeros() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(0.25), "0.25");
        assert_eq!(fmt_num(-1.5), "-1.5");
        assert_eq!(fmt_num(2000.0), "2000");
    }
}

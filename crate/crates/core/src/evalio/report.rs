use std::io::Write;

use crate::error::Result;

pub const CSV_HEADER: [&str; 7] = [
    "frame",
    "mean_epe",
    "median_epe",
    "pct_le_1px",
    "warp_psnr",
    "mean_conf",
    "ms_per_frame",
];

/// Extra columns written when a confidence threshold is supplied.
pub const STRATIFIED_HEADER: [&str; 2] = ["psnr_conf_high", "psnr_conf_all"];

/// One CSV row; absent values are written as empty cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FrameReport {
    pub frame: String,
    pub mean_epe: Option<f64>,
    pub median_epe: Option<f64>,
    pub pct_le_1px: Option<f64>,
    pub warp_psnr: Option<f64>,
    pub mean_conf: Option<f64>,
    pub ms_per_frame: Option<f64>,
    pub stratified: Option<(f64, f64)>,
}

fn cell(v: Option<f64>) -> String {
    match v {
        None => String::new(),
        Some(v) if v == f64::INFINITY => "inf".into(),
        Some(v) => format!("{v:.6}"),
    }
}

impl FrameReport {
    /// Mean of each column over `rows`, skipping empty cells; infinite PSNR
    /// values propagate.
    pub fn aggregate(rows: &[FrameReport], label: &str) -> FrameReport {
        let mean = |f: &dyn Fn(&FrameReport) -> Option<f64>| {
            let vals: Vec<f64> = rows.iter().filter_map(f).collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        };
        let strat_hi = mean(&|r| r.stratified.map(|s| s.0));
        let strat_all = mean(&|r| r.stratified.map(|s| s.1));
        FrameReport {
            frame: label.to_string(),
            mean_epe: mean(&|r| r.mean_epe),
            median_epe: mean(&|r| r.median_epe),
            pct_le_1px: mean(&|r| r.pct_le_1px),
            warp_psnr: mean(&|r| r.warp_psnr),
            mean_conf: mean(&|r| r.mean_conf),
            ms_per_frame: mean(&|r| r.ms_per_frame),
            stratified: strat_hi.zip(strat_all),
        }
    }
}

pub struct ReportWriter<W: Write> {
    inner: csv::Writer<W>,
    stratified: bool,
}

impl<W: Write> ReportWriter<W> {
    pub fn new(out: W, stratified: bool) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = CSV_HEADER.to_vec();
        if stratified {
            header.extend(STRATIFIED_HEADER);
        }
        inner.write_record(&header)?;
        Ok(Self { inner, stratified })
    }

    pub fn write(&mut self, r: &FrameReport) -> Result<()> {
        let mut rec = vec![
            r.frame.clone(),
            cell(r.mean_epe),
            cell(r.median_epe),
            cell(r.pct_le_1px),
            cell(r.warp_psnr),
            cell(r.mean_conf),
            cell(r.ms_per_frame),
        ];
        if self.stratified {
            rec.push(cell(r.stratified.map(|s| s.0)));
            rec.push(cell(r.stratified.map(|s| s.1)));
        }
        self.inner.write_record(&rec)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush().map_err(csv::Error::from)?;
        self.inner
            .into_inner()
            .map_err(|e| csv::Error::from(e.into_error()).into())
    }
}

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranking::{PairwiseTests, RankingReport};
use crate::scoring::{CaseResult, EntityCurve, EntityScore};
use crate::volume::Entity;

/// Column order of the per-case result table.
pub const RESULT_COLUMNS: [&str; 15] = [
    "team",
    "case_id",
    "DICE_AUC_WT",
    "DICE_AUC_TC",
    "DICE_AUC_ET",
    "FTP_RATIO_AUC_WT",
    "FTP_RATIO_AUC_TC",
    "FTP_RATIO_AUC_ET",
    "FTN_RATIO_AUC_WT",
    "FTN_RATIO_AUC_TC",
    "FTN_RATIO_AUC_ET",
    "SCORE_WT",
    "SCORE_TC",
    "SCORE_ET",
    "SCORE_OVERALL",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub team: String,
    pub case_id: String,
    #[serde(rename = "DICE_AUC_WT")]
    pub dice_auc_wt: f64,
    #[serde(rename = "DICE_AUC_TC")]
    pub dice_auc_tc: f64,
    #[serde(rename = "DICE_AUC_ET")]
    pub dice_auc_et: f64,
    #[serde(rename = "FTP_RATIO_AUC_WT")]
    pub ftp_ratio_auc_wt: f64,
    #[serde(rename = "FTP_RATIO_AUC_TC")]
    pub ftp_ratio_auc_tc: f64,
    #[serde(rename = "FTP_RATIO_AUC_ET")]
    pub ftp_ratio_auc_et: f64,
    #[serde(rename = "FTN_RATIO_AUC_WT")]
    pub ftn_ratio_auc_wt: f64,
    #[serde(rename = "FTN_RATIO_AUC_TC")]
    pub ftn_ratio_auc_tc: f64,
    #[serde(rename = "FTN_RATIO_AUC_ET")]
    pub ftn_ratio_auc_et: f64,
    #[serde(rename = "SCORE_WT")]
    pub score_wt: f64,
    #[serde(rename = "SCORE_TC")]
    pub score_tc: f64,
    #[serde(rename = "SCORE_ET")]
    pub score_et: f64,
    #[serde(rename = "SCORE_OVERALL")]
    pub score_overall: f64,
}

impl ResultRow {
    pub fn from_case(team: &str, result: &CaseResult) -> Self {
        let [wt, tc, et] = result.entities;
        Self {
            team: team.to_string(),
            case_id: result.case_id.clone(),
            dice_auc_wt: wt.auc_dsc,
            dice_auc_tc: tc.auc_dsc,
            dice_auc_et: et.auc_dsc,
            ftp_ratio_auc_wt: wt.auc_ftp,
            ftp_ratio_auc_tc: tc.auc_ftp,
            ftp_ratio_auc_et: et.auc_ftp,
            ftn_ratio_auc_wt: wt.auc_ftn,
            ftn_ratio_auc_tc: tc.auc_ftn,
            ftn_ratio_auc_et: et.auc_ftn,
            score_wt: wt.score,
            score_tc: tc.score,
            score_et: et.score,
            score_overall: result.overall,
        }
    }

    /// Restores the case result, keeping the stored scores as they are.
    pub fn to_case_result(&self) -> CaseResult {
        let e = |d, p, n, s| EntityScore {
            auc_dsc: d,
            auc_ftp: p,
            auc_ftn: n,
            score: s,
        };
        CaseResult {
            case_id: self.case_id.clone(),
            entities: [
                e(
                    self.dice_auc_wt,
                    self.ftp_ratio_auc_wt,
                    self.ftn_ratio_auc_wt,
                    self.score_wt,
                ),
                e(
                    self.dice_auc_tc,
                    self.ftp_ratio_auc_tc,
                    self.ftn_ratio_auc_tc,
                    self.score_tc,
                ),
                e(
                    self.dice_auc_et,
                    self.ftp_ratio_auc_et,
                    self.ftn_ratio_auc_et,
                    self.score_et,
                ),
            ],
            overall: self.score_overall,
        }
    }

    fn values(&self) -> [f64; 13] {
        [
            self.dice_auc_wt,
            self.dice_auc_tc,
            self.dice_auc_et,
            self.ftp_ratio_auc_wt,
            self.ftp_ratio_auc_tc,
            self.ftp_ratio_auc_et,
            self.ftn_ratio_auc_wt,
            self.ftn_ratio_auc_tc,
            self.ftn_ratio_auc_et,
            self.score_wt,
            self.score_tc,
            self.score_et,
            self.score_overall,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResultFormat {
    /// Four decimals per value.
    Csv,
    /// Full precision.
    Json,
}

impl ResultFormat {
    pub fn from_path(path: &Path) -> Self {
        if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"))
        {
            ResultFormat::Json
        } else {
            ResultFormat::Csv
        }
    }
}

pub fn results_csv(rows: &[ResultRow]) -> Result<Vec<u8>> {
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(RESULT_COLUMNS)?;
    for row in rows {
        let mut record = vec![row.team.clone(), row.case_id.clone()];
        record.extend(row.values().iter().map(|v| format!("{v:.4}")));
        w.write_record(&record)?;
    }
    w.into_inner()
        .map_err(|e| Error::io("<csv buffer>", e.into_error()))
}

pub fn write_results(path: &Path, rows: &[ResultRow], format: ResultFormat) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    let bytes = match format {
        ResultFormat::Csv => results_csv(rows)?,
        ResultFormat::Json => {
            let mut b = serde_json::to_vec_pretty(rows)?;
            b.push(b'\n');
            b
        }
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads a result table written by [`write_results`] (format by extension).
pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let invalid = |detail: String| Error::InvalidResults {
        path: path.to_path_buf(),
        detail,
    };
    let rows: Vec<ResultRow> = match ResultFormat::from_path(path) {
        ResultFormat::Json => serde_json::from_slice(&bytes).map_err(|e| invalid(e.to_string()))?,
        ResultFormat::Csv => {
            let mut r = csv::Reader::from_reader(bytes.as_slice());
            let header: Vec<String> = r
                .headers()
                .map_err(|e| invalid(e.to_string()))?
                .iter()
                .map(str::to_string)
                .collect();
            if header != RESULT_COLUMNS {
                return Err(invalid(format!("unexpected header {header:?}")));
            }
            r.deserialize()
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| invalid(e.to_string()))?
        }
    };
    if rows.is_empty() {
        return Err(invalid("no rows".into()));
    }
    Ok(rows)
}

/// `tau,dsc,ftp,ftn[,precision,recall]`, one line per threshold.
pub fn curve_csv(curve: &EntityCurve) -> Vec<u8> {
    let mut out = String::from("tau,dsc,ftp,ftn");
    let pr = curve.precision.as_ref().zip(curve.recall.as_ref());
    if pr.is_some() {
        out.push_str(",precision,recall");
    }
    out.push('\n');
    for (i, tau) in curve.grid.taus().iter().enumerate() {
        out.push_str(&format!(
            "{tau},{},{},{}",
            curve.dsc[i], curve.ftp[i], curve.ftn[i]
        ));
        if let Some((p, r)) = pr {
            out.push_str(&format!(",{},{}", p[i], r[i]));
        }
        out.push('\n');
    }
    out.into_bytes()
}

pub fn write_curve(path: &Path, curve: &EntityCurve) -> Result<()> {
    fs::write(path, curve_csv(curve)).map_err(|e| Error::io(path, e))
}

/// File name used for a case's curve dump, e.g. `BraTS_001_WT.csv`.
pub fn curve_file_name(case_id: &str, entity: Entity) -> String {
    format!("{case_id}_{}.csv", entity.abbrev())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn ranks_csv(report: &RankingReport) -> String {
    let t = &report.table;
    let mut out = String::from("team,case_id,rank_WT,rank_TC,rank_ET,CRS,NRS\n");
    for (ti, team) in t.teams.iter().enumerate() {
        for (ci, case) in t.cases.iter().enumerate() {
            let [a, b, c] = t.ranks[ti][ci];
            out.push_str(&format!(
                "{team},{case},{a},{b},{c},{},{:.6}\n",
                t.crs[ti][ci], t.nrs[ti][ci]
            ));
        }
    }
    out
}

pub fn pairwise_csv(tests: &PairwiseTests) -> String {
    let mut out =
        String::from("team_a,team_b,observed_delta,p_value,n_permutations,seed,exhaustive\n");
    for p in &tests.tests {
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{},{},{}\n",
            p.team_a,
            p.team_b,
            p.test.observed_delta,
            p.test.p_value,
            p.test.n_permutations,
            p.test.seed,
            p.test.exhaustive
        ));
    }
    out
}

pub fn leaderboard_csv(report: &RankingReport) -> String {
    let mut out = String::from("position,rank,team,FRS,p_vs_anchor\n");
    for (i, e) in report.leaderboard.entries.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{:.4},{:.6}\n",
            i + 1,
            e.rank,
            e.team,
            e.frs,
            e.p_vs_anchor
        ));
    }
    out
}

/// Writes `ranks.csv`, `pairwise.csv`, `leaderboard.csv` and `ranking.json`.
pub fn write_ranking(dir: &Path, report: &RankingReport) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_text(&dir.join("ranks.csv"), &ranks_csv(report))?;
    write_text(&dir.join("pairwise.csv"), &pairwise_csv(&report.pairwise))?;
    write_text(&dir.join("leaderboard.csv"), &leaderboard_csv(report))?;
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    write_text(&dir.join("ranking.json"), &json)
}

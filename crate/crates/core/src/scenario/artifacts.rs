use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::gridmap::write_layer_exports;
use crate::mission::{MissionRun, PathRow, TickRecord};
use crate::pose::Pose6;

use super::svg::render_svg;

/// Files written for one run, relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct ArtifactPaths {
    pub log: PathBuf,
    pub summary: PathBuf,
    pub ugv_trajectory: PathBuf,
    pub uav_trajectory: PathBuf,
    pub ugv_path: PathBuf,
    pub uav_path: PathBuf,
    pub map_dir: PathBuf,
    pub svg: Option<PathBuf>,
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

/// `tick,time,x,y,z,roll,pitch,yaw` for one robot.
pub fn write_trajectory_csv(path: &Path, records: &[TickRecord], pose: fn(&TickRecord) -> Pose6) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["tick", "time", "x", "y", "z", "roll", "pitch", "yaw"])
        .map_err(csv_err)?;
    for r in records {
        let p = pose(r);
        w.write_record([
            r.tick.to_string(),
            r.time.to_string(),
            p.x.to_string(),
            p.y.to_string(),
            p.z.to_string(),
            p.roll.to_string(),
            p.pitch.to_string(),
            p.yaw.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()
}

/// `tick,x,y,cost` rows.
pub fn write_path_csv(path: &Path, rows: &[PathRow]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["tick", "x", "y", "cost"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([r.tick.to_string(), r.x.to_string(), r.y.to_string(), r.cost.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()
}

/// Writes the log, summary, trajectories, paths and map layers of `run`
/// into `out`, plus the SVG top view when `svg` is set.
pub fn write_artifacts(run: &MissionRun, out: &Path, svg: bool) -> io::Result<ArtifactPaths> {
    fs::create_dir_all(out)?;
    let paths = ArtifactPaths {
        log: out.join("log.ndjson"),
        summary: out.join("summary.json"),
        ugv_trajectory: out.join("ugv_trajectory.csv"),
        uav_trajectory: out.join("uav_trajectory.csv"),
        ugv_path: out.join("ugv_path.csv"),
        uav_path: out.join("uav_path.csv"),
        map_dir: out.join("map"),
        svg: svg.then(|| out.join("top_view.svg")),
    };
    let mut log = io::BufWriter::new(fs::File::create(&paths.log)?);
    run.log.write_ndjson(&mut log)?;
    log.flush()?;
    let mut summary = serde_json::to_string_pretty(&run.summary).map_err(io::Error::other)?;
    summary.push('\n');
    fs::write(&paths.summary, summary)?;
    write_trajectory_csv(&paths.ugv_trajectory, &run.log.records, |r| r.ugv)?;
    write_trajectory_csv(&paths.uav_trajectory, &run.log.records, |r| r.uav)?;
    write_path_csv(&paths.ugv_path, &run.ugv_paths)?;
    write_path_csv(&paths.uav_path, &run.uav_paths)?;
    fs::create_dir_all(&paths.map_dir)?;
    let map_json = serde_json::to_string(&run.map).map_err(io::Error::other)?;
    fs::write(paths.map_dir.join("map.json"), map_json)?;
    write_layer_exports(&run.map, &paths.map_dir)?;
    if let Some(p) = &paths.svg {
        fs::write(p, render_svg(run))?;
    }
    Ok(paths)
}

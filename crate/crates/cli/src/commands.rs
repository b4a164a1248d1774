use std::fs;
use std::net::SocketAddr;
use std::path::Path;

use boundline::assessment::{assess_lines, layers_grid, AssessmentConfig, DEFAULT_DISTANCES};
use boundline::contours::{detect_contours, CueParams};
use boundline::geojson::{lines_to_geojson, network_to_geojson, read_file, read_lines, write_file};
use boundline::pipeline::{generate_network, PipelineParams};
use boundline::raster::{load_image, rgb_to_lab, sidecar_world_file, write_world_file, ImageGrid};
use boundline::superpixels::{slic, superpixel_outlines, SlicParams};
use boundline::vectornet::{buffer_filter, build_network, clean_topology};
use boundline::{Error, Polyline};
use boundline_service::{resolve_data_dir, serve, ServeConfig, ServeError};

use crate::{Command, CueArgs, ImageArgs, SlicArgs, EXIT_INTERNAL, EXIT_IO, EXIT_PARAMS};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn params(message: impl Into<String>) -> Self {
        Self { code: EXIT_PARAMS, message: message.into() }
    }

    fn io(message: impl Into<String>) -> Self {
        Self { code: EXIT_IO, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io(_)
            | Error::Image(_)
            | Error::Json(_)
            | Error::GeoJson(_)
            | Error::Format(_)
            | Error::ImageNotFound(_)
            | Error::WorldFileNotFound(_)
            | Error::WorldFileParse { .. }
            | Error::SingularTransform(_) => EXIT_IO,
            Error::Parameter(_) | Error::Domain(_) | Error::TooSmall { .. } | Error::Dimension(_) | Error::EmptyReference => {
                EXIT_PARAMS
            }
            Error::EigenNoConvergence { .. }
            | Error::Topology { .. }
            | Error::UnknownNode(_)
            | Error::NoPath(_)
            | Error::UndefinedMeasure(_)
            | Error::State(_) => EXIT_INTERNAL,
        };
        Self { code, message: e.to_string() }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn load(io: &ImageArgs) -> Result<ImageGrid> {
    let wf = io.worldfile.clone().unwrap_or_else(|| sidecar_world_file(&io.image));
    let img = load_image(&io.image, &wf)?;
    log::info!("loaded {} ({}x{}, gsd {} m)", io.image.display(), img.width, img.height, img.transform.gsd());
    Ok(img)
}

fn out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))
}

fn parent_dir(file: &Path) -> Result<()> {
    match file.parent() {
        Some(p) if !p.as_os_str().is_empty() => out_dir(p),
        _ => Ok(()),
    }
}

fn cue_params(a: &CueArgs) -> Result<CueParams> {
    let mut p = match &a.cue_params {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::params(format!("{}: {e}", path.display())))?
        }
        None => CueParams::default(),
    };
    if let Some(t) = a.threshold {
        p.threshold = t;
    }
    if a.no_spectral {
        p.spectral = false;
    }
    if let Some(o) = a.orientations {
        p.orientations = o;
    }
    if let Some(r) = &a.radii {
        p.radii = r.clone();
        p.weights = vec![[1.0; 4]; r.len()];
    }
    if a.no_texture {
        for w in &mut p.weights {
            w[3] = 0.0;
        }
    }
    if let Some(m) = a.max_dim {
        p.max_dim = m;
    }
    if let Some(s) = a.seed {
        p.seed = s;
    }
    p.validate()?;
    Ok(p)
}

fn slic_params(a: &SlicArgs) -> Result<SlicParams> {
    let mut p = SlicParams::default();
    p.region_size = a.region_size;
    if let Some(m) = a.compactness {
        p.compactness = m;
    }
    if let Some(i) = a.iters {
        p.iterations = i;
    }
    p.min_region_size = a.min_region_size;
    p.validate()?;
    Ok(p)
}

fn write_lines(path: &Path, lines: &[Polyline]) -> Result<()> {
    write_file(path, &lines_to_geojson(lines))?;
    Ok(())
}

fn read_layer(path: &Path, exact_only: bool) -> Result<Vec<Polyline>> {
    Ok(read_lines(&read_file(path)?, exact_only)?)
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Contours { io, cue } => {
            let params = cue_params(&cue)?;
            let img = load(&io)?;
            out_dir(&io.output)?;
            let res = detect_contours(&rgb_to_lab(&img), &params)?;
            let d = &io.output;
            res.gpb.save_png16(&d.join("gpb.png"))?;
            write_world_file(&d.join("gpb.pgw"), &res.gpb.transform)?;
            res.ucm.save_png16(&d.join("ucm.png"))?;
            write_world_file(&d.join("ucm.pgw"), &res.ucm.transform)?;
            res.binary.save_png(&d.join("binary.png"))?;
            write_world_file(&d.join("binary.pgw"), &res.binary.transform)?;
            write_lines(&d.join("outlines.geojson"), &res.outlines)?;
            log::info!("{} outlines, {} boundary pixels", res.outlines.len(), res.binary.count());
        }
        Command::Slic { io, slic: s } => {
            let params = slic_params(&s)?;
            let img = load(&io)?;
            out_dir(&io.output)?;
            let labels = slic(&rgb_to_lab(&img), &params)?;
            let outlines = superpixel_outlines(&labels);
            labels.save_png16(&io.output.join("labels.png"))?;
            write_world_file(&io.output.join("labels.pgw"), &img.transform)?;
            write_lines(&io.output.join("outlines.geojson"), &outlines)?;
            log::info!("{} superpixels, {} outlines", labels.count(), outlines.len());
        }
        Command::Combine { slic, gpb, radius, gsd, snap_tol, min_dangle, output } => {
            if !(radius >= 0.0) || !(gsd > 0.0) {
                return Err(CliError::params("radius must be >= 0 and gsd > 0"));
            }
            let slic_lines = read_layer(&slic, false)?;
            let gpb_lines = read_layer(&gpb, false)?;
            let kept = buffer_filter(&slic_lines, &gpb_lines, radius);
            if let Some(w) = &kept.warning {
                log::warn!("{w}");
            }
            let cleaned = clean_topology(&kept.lines, snap_tol.unwrap_or(gsd), min_dangle.unwrap_or(10.0 * gsd));
            let net = build_network(&cleaned)?;
            if net.edges.is_empty() {
                log::warn!("network is empty: no SLIC outline lies within {radius} m of a gPb outline");
                eprintln!("warning: empty network");
            }
            parent_dir(&output)?;
            write_file(&output, &network_to_geojson(&net))?;
            log::info!("{} of {} SLIC lines kept, {} nodes, {} edges", kept.lines.len(), slic_lines.len(), net.nodes.len(), net.edges.len());
        }
        Command::Network { io, cue, slic: s, radius } => {
            let params = PipelineParams { cue: cue_params(&cue)?, slic: slic_params(&s)?, buffer_radius_m: radius, ..Default::default() };
            params.validate()?;
            let img = load(&io)?;
            out_dir(&io.output)?;
            let run = generate_network(&img, &params)?;
            for w in &run.warnings {
                log::warn!("{w}");
            }
            write_lines(&io.output.join("gpb_outlines.geojson"), &run.contours.outlines)?;
            write_lines(&io.output.join("slic_outlines.geojson"), &run.slic_lines)?;
            write_file(&io.output.join("network.geojson"), &network_to_geojson(&run.network))?;
        }
        Command::Assess { delineated, reference, gsd, distances, output, json } => {
            let distances = distances.unwrap_or_else(|| DEFAULT_DISTANCES.to_vec());
            let del = read_layer(&delineated, false)?;
            let refr = read_layer(&reference, true)?;
            let grid = layers_grid(&del, &refr, gsd, &distances)?;
            let cfg = AssessmentConfig { distances, grid };
            let series = assess_lines(&del, &refr, &cfg)?;
            parent_dir(&output)?;
            fs::write(&output, series.to_csv()).map_err(|e| CliError::io(format!("{}: {e}", output.display())))?;
            if let Some(j) = json {
                parent_dir(&j)?;
                write_file(&j, &series.to_json())?;
            }
            print!("{}", series.to_text());
        }
        Command::Serve { port, host, data_dir } => {
            let cfg = ServeConfig { addr: SocketAddr::new(host, port), data_dir: resolve_data_dir(data_dir) };
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError { code: EXIT_INTERNAL, message: e.to_string() })?;
            rt.block_on(serve(cfg)).map_err(|e| match e {
                ServeError::Bind { .. } | ServeError::Storage { .. } | ServeError::Io(_) => CliError::io(e.to_string()),
            })?;
        }
    }
    Ok(())
}


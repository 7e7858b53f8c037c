//! Point-cloud file formats.
//!
//! * `xyz` — text, one point per line, three whitespace-separated reals;
//!   `#` comment lines and blank lines are ignored.
//! * `ply_ascii` — ASCII PLY with at least x,y,z vertex properties; extra
//!   per-vertex properties and faces are ignored.
//! * `kitti_bin` — little-endian f32 records of (x, y, z, intensity);
//!   the intensity channel is read and discarded.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pointcloud::{Point3, PointCloud};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    Xyz,
    PlyAscii,
    KittiBin,
}

impl CloudFormat {
    pub fn as_str(&self) -> &'static str {
        match self {
            CloudFormat::Xyz => "xyz",
            CloudFormat::PlyAscii => "ply_ascii",
            CloudFormat::KittiBin => "kitti_bin",
        }
    }
}

impl std::str::FromStr for CloudFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xyz" => Ok(CloudFormat::Xyz),
            "ply" | "ply_ascii" => Ok(CloudFormat::PlyAscii),
            "bin" | "kitti_bin" => Ok(CloudFormat::KittiBin),
            other => Err(Error::Argument(format!("unknown cloud format {other:?}"))),
        }
    }
}

/// Guesses the format from the file extension (`.xyz`/`.txt`, `.ply`, `.bin`).
pub fn detect_format(path: &Path) -> Option<CloudFormat> {
    match path.extension()?.to_str()? {
        "xyz" | "txt" => Some(CloudFormat::Xyz),
        "ply" => Some(CloudFormat::PlyAscii),
        "bin" => Some(CloudFormat::KittiBin),
        _ => None,
    }
}

/// Loads a cloud; the id is the file stem and point order matches file order.
pub fn load_cloud(path: &Path, format: CloudFormat) -> Result<PointCloud> {
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let points = match format {
        CloudFormat::Xyz => parse_xyz(path)?,
        CloudFormat::PlyAscii => parse_ply_ascii(path)?,
        CloudFormat::KittiBin => parse_kitti_bin(path)?,
    };
    let mut cloud = PointCloud::new(id, points)?;
    cloud.source = Some(path.display().to_string());
    Ok(cloud)
}

/// Writes a cloud in the given format. xyz coordinates use the shortest
/// representation that round-trips exactly; kitti_bin narrows to f32.
pub fn save_cloud(cloud: &PointCloud, path: &Path, format: CloudFormat) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out: Vec<u8> = Vec::new();
    match format {
        CloudFormat::Xyz => {
            for p in &cloud.points {
                writeln!(out, "{} {} {}", p.x, p.y, p.z).map_err(io_err)?;
            }
        }
        CloudFormat::PlyAscii => {
            writeln!(out, "ply").map_err(io_err)?;
            writeln!(out, "format ascii 1.0").map_err(io_err)?;
            writeln!(out, "element vertex {}", cloud.points.len()).map_err(io_err)?;
            writeln!(out, "property double x").map_err(io_err)?;
            writeln!(out, "property double y").map_err(io_err)?;
            writeln!(out, "property double z").map_err(io_err)?;
            writeln!(out, "end_header").map_err(io_err)?;
            for p in &cloud.points {
                writeln!(out, "{} {} {}", p.x, p.y, p.z).map_err(io_err)?;
            }
        }
        CloudFormat::KittiBin => {
            for p in &cloud.points {
                out.extend_from_slice(&(p.x as f32).to_le_bytes());
                out.extend_from_slice(&(p.y as f32).to_le_bytes());
                out.extend_from_slice(&(p.z as f32).to_le_bytes());
                out.extend_from_slice(&0f32.to_le_bytes());
            }
        }
    }
    fs::write(path, out).map_err(io_err)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_coord(path: &Path, line_no: usize, field: &str) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| Error::Parse {
        path: path.display().to_string(),
        line: line_no,
        msg: format!("expected a decimal real, got {field:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Validation(format!(
            "{}:{line_no}: non-finite coordinate {field:?}",
            path.display()
        )));
    }
    Ok(v)
}

fn parse_xyz(path: &Path) -> Result<Vec<Point3>> {
    let text = read_text(path)?;
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: line_no,
                msg: format!("expected 3 coordinates, got {} fields", fields.len()),
            });
        }
        points.push(Point3::new(
            parse_coord(path, line_no, fields[0])?,
            parse_coord(path, line_no, fields[1])?,
            parse_coord(path, line_no, fields[2])?,
        ));
    }
    Ok(points)
}

fn parse_ply_ascii(path: &Path) -> Result<Vec<Point3>> {
    let text = read_text(path)?;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.display().to_string(),
        line,
        msg,
    };

    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (n1, first) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file".into()))?;
    if first != "ply" {
        return Err(parse_err(n1, format!("expected \"ply\" magic, got {first:?}")));
    }
    let (n2, format_line) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing format line".into()))?;
    if format_line != "format ascii 1.0" {
        return Err(parse_err(
            n2,
            format!("only \"format ascii 1.0\" is supported, got {format_line:?}"),
        ));
    }

    // Header: elements in declared order, each with a count; for the vertex
    // element we track which property columns hold x, y, z.
    struct Element {
        name: String,
        count: usize,
        properties: Vec<String>,
    }
    let mut elements: Vec<Element> = Vec::new();
    let mut header_end = 0usize;
    for (line_no, line) in lines.by_ref() {
        if line == "end_header" {
            header_end = line_no;
            break;
        }
        if line.is_empty() || line.starts_with("comment") || line.starts_with("obj_info") {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["element", name, count] => {
                let count: usize = count.parse().map_err(|_| {
                    parse_err(line_no, format!("bad element count {count:?}"))
                })?;
                elements.push(Element {
                    name: (*name).to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            ["property", "list", ..] => match elements.last_mut() {
                Some(el) => el.properties.push("<list>".into()),
                None => return Err(parse_err(line_no, "property before element".into())),
            },
            ["property", _ty, name] => match elements.last_mut() {
                Some(el) => el.properties.push((*name).to_string()),
                None => return Err(parse_err(line_no, "property before element".into())),
            },
            _ => {
                return Err(parse_err(line_no, format!("unrecognized header line {line:?}")));
            }
        }
    }
    if header_end == 0 {
        return Err(parse_err(1, "missing end_header".into()));
    }

    let vertex = elements
        .iter()
        .find(|e| e.name == "vertex")
        .ok_or_else(|| parse_err(header_end, "no vertex element declared".into()))?;
    let col = |name: &str| -> Result<usize> {
        vertex
            .properties
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| parse_err(header_end, format!("vertex element lacks property {name}")))
    };
    let (xi, yi, zi) = (col("x")?, col("y")?, col("z")?);

    let mut points = Vec::new();
    let mut data = lines.filter(|(_, l)| !l.is_empty());
    for element in &elements {
        for _ in 0..element.count {
            let (line_no, line) = data.next().ok_or_else(|| {
                parse_err(
                    header_end,
                    format!("file ends before all {} rows of {}", element.count, element.name),
                )
            })?;
            if element.name != "vertex" {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < vertex.properties.len() {
                return Err(parse_err(
                    line_no,
                    format!(
                        "vertex row has {} fields, header declares {}",
                        fields.len(),
                        vertex.properties.len()
                    ),
                ));
            }
            points.push(Point3::new(
                parse_coord(path, line_no, fields[xi])?,
                parse_coord(path, line_no, fields[yi])?,
                parse_coord(path, line_no, fields[zi])?,
            ));
        }
    }
    Ok(points)
}

fn parse_kitti_bin(path: &Path) -> Result<Vec<Point3>> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.len() % 16 != 0 {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 0,
            msg: format!(
                "kitti_bin file length {} is not a multiple of 16 bytes",
                bytes.len()
            ),
        });
    }
    let mut points = Vec::with_capacity(bytes.len() / 16);
    for (rec, chunk) in bytes.chunks_exact(16).enumerate() {
        let f = |off: usize| f32::from_le_bytes(chunk[off..off + 4].try_into().unwrap()) as f64;
        let (x, y, z) = (f(0), f(4), f(8));
        // chunk[12..16] is the intensity channel, discarded.
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::Validation(format!(
                "{}: record {rec}: non-finite coordinate",
                path.display()
            )));
        }
        points.push(Point3::new(x, y, z));
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(name: &str, contents: &[u8]) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(name);
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(contents).unwrap();
        (dir, path)
    }

    #[test]
    fn xyz_two_lines() {
        let (_d, p) = write_temp("a.xyz", b"0 0 0\n1 2 3\n");
        let c = load_cloud(&p, CloudFormat::Xyz).unwrap();
        assert_eq!(c.id, "a");
        assert_eq!(c.points, vec![Point3::ZERO, Point3::new(1.0, 2.0, 3.0)]);
    }

    #[test]
    fn xyz_skips_comments_and_blanks() {
        let (_d, p) = write_temp("a.xyz", b"# header\n\n0.5 -1 2\n");
        let c = load_cloud(&p, CloudFormat::Xyz).unwrap();
        assert_eq!(c.points, vec![Point3::new(0.5, -1.0, 2.0)]);
    }

    #[test]
    fn xyz_parse_error_names_line() {
        let (_d, p) = write_temp("a.xyz", b"0 0 abc\n1 1 1\n");
        match load_cloud(&p, CloudFormat::Xyz) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn xyz_wrong_field_count() {
        let (_d, p) = write_temp("a.xyz", b"1 2\n");
        assert!(matches!(
            load_cloud(&p, CloudFormat::Xyz),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn xyz_non_finite_is_validation_error() {
        let (_d, p) = write_temp("a.xyz", b"0 0 inf\n");
        assert!(matches!(
            load_cloud(&p, CloudFormat::Xyz),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn xyz_empty_file_is_empty_cloud_error() {
        let (_d, p) = write_temp("a.xyz", b"# nothing\n");
        assert!(matches!(
            load_cloud(&p, CloudFormat::Xyz),
            Err(Error::EmptyCloud(_))
        ));
    }

    #[test]
    fn kitti_bin_two_records() {
        // Reference encoding: two float32 quadruples, little endian.
        let mut bytes = Vec::new();
        for v in [1.0f32, 2.0, 3.0, 0.7, -4.0, 5.5, -6.25, 0.1] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        assert_eq!(bytes.len(), 32);
        let (_d, p) = write_temp("a.bin", &bytes);
        let c = load_cloud(&p, CloudFormat::KittiBin).unwrap();
        assert_eq!(c.points.len(), 2);
        assert_eq!(c.points[0], Point3::new(1.0, 2.0, 3.0));
        assert_eq!(c.points[1], Point3::new(-4.0, 5.5, -6.25));
    }

    #[test]
    fn kitti_bin_bad_length() {
        let (_d, p) = write_temp("a.bin", &[0u8; 20]);
        assert!(matches!(
            load_cloud(&p, CloudFormat::KittiBin),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn ply_with_extra_properties_and_faces() {
        let text = "\
ply
format ascii 1.0
comment generated
element vertex 3
property float x
property float y
property float z
property uchar red
element face 1
property list uchar int vertex_indices
end_header
0 0 0 255
1 0 0 254
0 1 0 253
3 0 1 2
";
        let (_d, p) = write_temp("a.ply", text.as_bytes());
        let c = load_cloud(&p, CloudFormat::PlyAscii).unwrap();
        assert_eq!(
            c.points,
            vec![
                Point3::ZERO,
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0)
            ]
        );
    }

    #[test]
    fn ply_missing_coordinate_property() {
        let text = "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nend_header\n0 0\n";
        let (_d, p) = write_temp("a.ply", text.as_bytes());
        assert!(matches!(
            load_cloud(&p, CloudFormat::PlyAscii),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn save_load_round_trip_xyz_and_ply() {
        let cloud = PointCloud::new(
            "rt",
            vec![
                Point3::new(0.1, -2.5000000000000004, 3e-17),
                Point3::new(7.0, 8.125, -9.0),
            ],
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        for format in [CloudFormat::Xyz, CloudFormat::PlyAscii] {
            let path = dir.path().join(format!("rt.{}", format.as_str()));
            save_cloud(&cloud, &path, format).unwrap();
            let back = load_cloud(&path, format).unwrap();
            assert_eq!(back.points, cloud.points, "{format:?}");
        }
    }

    #[test]
    fn save_load_round_trip_kitti_f32() {
        let cloud = PointCloud::new(
            "rt",
            vec![Point3::new(1.5, -2.25, 3.125), Point3::new(0.0, 4.0, -8.5)],
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.bin");
        save_cloud(&cloud, &path, CloudFormat::KittiBin).unwrap();
        let back = load_cloud(&path, CloudFormat::KittiBin).unwrap();
        assert_eq!(back.points, cloud.points);
    }

    #[test]
    fn detect_format_by_extension() {
        assert_eq!(detect_format(Path::new("a.xyz")), Some(CloudFormat::Xyz));
        assert_eq!(detect_format(Path::new("a.ply")), Some(CloudFormat::PlyAscii));
        assert_eq!(detect_format(Path::new("a.bin")), Some(CloudFormat::KittiBin));
        assert_eq!(detect_format(Path::new("a.pcd")), None);
    }
}

use std::fmt::Write;
use std::path::Path;

use super::CloudFormat;
use crate::error::{Error, Result};
use crate::geometry::{Point3, PointCloud};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { count: Scalar, item: Scalar },
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

#[derive(Debug, PartialEq, Eq)]
enum Encoding {
    Ascii,
    BinaryLe,
}

struct Header {
    encoding: Encoding,
    elements: Vec<Element>,
    /// byte offset of the first data byte
    data_start: usize,
    /// 1-based line number of the first data line (ASCII)
    data_line: usize,
}

fn format_error(path: &Path, location: String, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        location,
        message: message.into(),
    }
}

fn parse_header(path: &Path, bytes: &[u8]) -> Result<Header> {
    let mut pos = 0;
    let mut lineno = 0;
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|i| pos + i)
            .ok_or_else(|| {
                format_error(path, format!("byte {pos}"), "header has no end_header line")
            })?;
        lineno += 1;
        let line = std::str::from_utf8(&bytes[pos..end])
            .map_err(|_| format_error(path, format!("line {lineno}"), "header is not ASCII"))?
            .trim_end_matches('\r')
            .trim();
        pos = end + 1;
        let fail = |msg: String| format_error(path, format!("line {lineno}"), msg);
        let mut words = line.split_whitespace();
        let keyword = words.next().unwrap_or("");
        if lineno == 1 {
            if line != "ply" {
                return Err(fail("missing `ply` magic".into()));
            }
            continue;
        }
        match keyword {
            "" | "comment" | "obj_info" => {}
            "format" => {
                encoding = Some(match words.next() {
                    Some("ascii") => Encoding::Ascii,
                    Some("binary_little_endian") => Encoding::BinaryLe,
                    Some(other) => return Err(fail(format!("unsupported encoding `{other}`"))),
                    None => return Err(fail("format line without encoding".into())),
                });
            }
            "element" => {
                let name = words
                    .next()
                    .ok_or_else(|| fail("element without name".into()))?;
                let count = words
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| fail(format!("element `{name}` without a valid count")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    props: Vec::new(),
                });
            }
            "property" => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| fail("property before any element".into()))?;
                let ty = words
                    .next()
                    .ok_or_else(|| fail("property without type".into()))?;
                let prop = if ty == "list" {
                    let count = words.next().and_then(Scalar::parse);
                    let item = words.next().and_then(Scalar::parse);
                    match (count, item) {
                        (Some(count), Some(item)) => Property::List { count, item },
                        _ => return Err(fail("malformed list property".into())),
                    }
                } else {
                    let ty = Scalar::parse(ty)
                        .ok_or_else(|| fail(format!("unknown property type `{ty}`")))?;
                    let name = words
                        .next()
                        .ok_or_else(|| fail("property without name".into()))?;
                    Property::Scalar {
                        name: name.to_string(),
                        ty,
                    }
                };
                element.props.push(prop);
            }
            "end_header" => break,
            other => return Err(fail(format!("unexpected header keyword `{other}`"))),
        }
    }
    let encoding =
        encoding.ok_or_else(|| format_error(path, "header".into(), "missing format line"))?;
    Ok(Header {
        encoding,
        elements,
        data_start: pos,
        data_line: lineno + 1,
    })
}

/// Positions of x, y, z (and optional red, green, blue) in the vertex
/// element's property list.
struct VertexLayout {
    xyz: [usize; 3],
    rgb: Option<[usize; 3]>,
}

fn vertex_layout(path: &Path, element: &Element) -> Result<VertexLayout> {
    let find = |wanted: &str| {
        element
            .props
            .iter()
            .position(|p| matches!(p, Property::Scalar { name, .. } if name == wanted))
    };
    let mut xyz = [0; 3];
    for (slot, axis) in xyz.iter_mut().zip(["x", "y", "z"]) {
        let i = find(axis).ok_or_else(|| {
            format_error(
                path,
                "header".into(),
                format!("vertex has no `{axis}` property"),
            )
        })?;
        if let Property::Scalar { ty, .. } = element.props[i] {
            if ty != Scalar::F32 && ty != Scalar::F64 {
                return Err(format_error(
                    path,
                    "header".into(),
                    format!("vertex `{axis}` must be float or double"),
                ));
            }
        }
        *slot = i;
    }
    let rgb = match (find("red"), find("green"), find("blue")) {
        (Some(r), Some(g), Some(b)) => Some([r, g, b]),
        _ => None,
    };
    Ok(VertexLayout { xyz, rgb })
}

type Parsed = (Vec<Point3>, Option<Vec<[u8; 3]>>);

fn parse_full(path: &Path, bytes: &[u8], format: Option<CloudFormat>) -> Result<Parsed> {
    let header = parse_header(path, bytes)?;
    match (format, &header.encoding) {
        (Some(CloudFormat::PlyAscii), Encoding::BinaryLe)
        | (Some(CloudFormat::PlyBinaryLe), Encoding::Ascii) => {
            return Err(format_error(
                path,
                "header".into(),
                "PLY encoding does not match the requested format",
            ));
        }
        _ => {}
    }
    let vertex = header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| Error::EmptyInput(path.to_path_buf()))?;
    let layout = vertex_layout(path, &header.elements[vertex])?;
    match header.encoding {
        Encoding::Ascii => parse_ascii(path, bytes, &header, vertex, &layout),
        Encoding::BinaryLe => parse_binary(path, bytes, &header, vertex, &layout),
    }
}

fn parse_ascii(
    path: &Path,
    bytes: &[u8],
    header: &Header,
    vertex: usize,
    layout: &VertexLayout,
) -> Result<Parsed> {
    let text = std::str::from_utf8(&bytes[header.data_start..])
        .map_err(|_| format_error(path, "data".into(), "ASCII body is not valid text"))?;
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let mut points = Vec::new();
    let mut colors = layout.rgb.map(|_| Vec::new());
    for (ei, element) in header.elements.iter().enumerate() {
        for _ in 0..element.count {
            let (offset, line) = lines.next().ok_or_else(|| {
                format_error(
                    path,
                    "end of file".into(),
                    format!("missing `{}` entries", element.name),
                )
            })?;
            if ei != vertex {
                continue;
            }
            let lineno = header.data_line + offset;
            let fail = |msg: String| format_error(path, format!("line {lineno}"), msg);
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let mut values = Vec::with_capacity(element.props.len());
            let mut t = 0;
            for prop in &element.props {
                let mut next = || -> Result<f64> {
                    let tok = tokens.get(t).ok_or_else(|| fail("too few values".into()))?;
                    t += 1;
                    tok.parse::<f64>()
                        .map_err(|_| fail(format!("`{tok}` is not a number")))
                };
                match prop {
                    Property::Scalar { .. } => values.push(next()?),
                    Property::List { .. } => {
                        let count = next()? as usize;
                        for _ in 0..count {
                            next()?;
                        }
                        values.push(f64::NAN);
                    }
                }
            }
            points.push(Point3::new(
                values[layout.xyz[0]],
                values[layout.xyz[1]],
                values[layout.xyz[2]],
            ));
            if let (Some(c), Some(rgb)) = (colors.as_mut(), layout.rgb) {
                c.push(rgb.map(|i| values[i].clamp(0.0, 255.0) as u8));
            }
        }
    }
    Ok((points, colors))
}

fn parse_binary(
    path: &Path,
    bytes: &[u8],
    header: &Header,
    vertex: usize,
    layout: &VertexLayout,
) -> Result<Parsed> {
    let mut pos = header.data_start;
    let take = |pos: &mut usize, len: usize| -> Result<&[u8]> {
        let end = *pos + len;
        if end > bytes.len() {
            return Err(format_error(
                path,
                format!("byte {}", *pos),
                "unexpected end of binary data",
            ));
        }
        let s = &bytes[*pos..end];
        *pos = end;
        Ok(s)
    };
    let mut points = Vec::new();
    let mut colors = layout.rgb.map(|_| Vec::new());
    for (ei, element) in header.elements.iter().enumerate() {
        let mut values = vec![0.0; element.props.len()];
        for _ in 0..element.count {
            for (pi, prop) in element.props.iter().enumerate() {
                match *prop {
                    Property::Scalar { ty, .. } => {
                        values[pi] = ty.read_le(take(&mut pos, ty.size())?)
                    }
                    Property::List { count, item } => {
                        let n = count.read_le(take(&mut pos, count.size())?);
                        if !(n >= 0.0) {
                            return Err(format_error(
                                path,
                                format!("byte {pos}"),
                                "negative list length",
                            ));
                        }
                        take(&mut pos, n as usize * item.size())?;
                    }
                }
            }
            if ei == vertex {
                points.push(Point3::new(
                    values[layout.xyz[0]],
                    values[layout.xyz[1]],
                    values[layout.xyz[2]],
                ));
                if let (Some(c), Some(rgb)) = (colors.as_mut(), layout.rgb) {
                    c.push(rgb.map(|i| values[i].clamp(0.0, 255.0) as u8));
                }
            }
        }
    }
    Ok((points, colors))
}

pub(super) fn parse(path: &Path, bytes: &[u8], format: Option<CloudFormat>) -> Result<Vec<Point3>> {
    parse_full(path, bytes, format).map(|(p, _)| p)
}

pub(super) fn parse_colors(path: &Path, bytes: &[u8]) -> Result<Option<Vec<[u8; 3]>>> {
    parse_full(path, bytes, None).map(|(_, c)| c)
}

pub(super) fn encode(cloud: &PointCloud, colors: Option<&[[u8; 3]]>, binary: bool) -> Vec<u8> {
    let mut header = String::new();
    header.push_str("ply\n");
    header.push_str(if binary {
        "format binary_little_endian 1.0\n"
    } else {
        "format ascii 1.0\n"
    });
    writeln!(header, "element vertex {}", cloud.len()).unwrap();
    header.push_str("property double x\nproperty double y\nproperty double z\n");
    if colors.is_some() {
        header.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    header.push_str("end_header\n");
    let mut out = header.into_bytes();
    if binary {
        for (i, p) in cloud.iter().enumerate() {
            for c in p.iter() {
                out.extend_from_slice(&c.to_le_bytes());
            }
            if let Some(c) = colors {
                out.extend_from_slice(&c[i]);
            }
        }
    } else {
        let mut body = String::new();
        for (i, p) in cloud.iter().enumerate() {
            write!(body, "{} {} {}", p.x, p.y, p.z).unwrap();
            if let Some(c) = colors {
                write!(body, " {} {} {}", c[i][0], c[i][1], c[i][2]).unwrap();
            }
            body.push('\n');
        }
        out.extend_from_slice(body.as_bytes());
    }
    out
}

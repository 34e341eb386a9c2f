//! Binary PPM (P6) and, with the `png` feature, PNG.

use std::fs;
use std::path::Path;

use wheelprobe_core::vision::RgbImage;

use crate::error::{CliError, Result};

/// Read an RGB image, choosing the decoder from the file's magic bytes.
pub fn read_image(path: &Path) -> Result<RgbImage> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode(&bytes).map_err(|msg| CliError::format(path, msg))
}

pub fn decode(bytes: &[u8]) -> Result<RgbImage, String> {
    if bytes.starts_with(b"P6") {
        decode_ppm(bytes)
    } else if bytes.starts_with(b"\x89PNG") {
        decode_png(bytes)
    } else {
        Err("not a binary PPM or PNG image".into())
    }
}

/// Write binary PPM, or PNG when the extension is `.png`.
pub fn write_image(path: &Path, image: &RgbImage) -> Result<()> {
    let bytes = if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
    {
        encode_png(image).map_err(|msg| CliError::format(path, msg))?
    } else {
        encode_ppm(image)
    };
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn encode_ppm(image: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.reserve(image.pixels().len() * 3);
    for px in image.pixels() {
        out.extend_from_slice(px);
    }
    out
}

pub fn decode_ppm(bytes: &[u8]) -> Result<RgbImage, String> {
    let mut pos = 2;
    let mut header = [0usize; 3];
    for field in &mut header {
        // Whitespace and `#` comments may separate header fields.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or("malformed PPM header")?;
    }
    let [width, height, maxval] = header;
    if maxval != 255 {
        return Err(format!(
            "unsupported PPM maxval {maxval}; only 8-bit images are read"
        ));
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err("malformed PPM header".into());
    }
    let data = &bytes[pos + 1..];
    let need = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or("PPM dimensions overflow")?;
    if data.len() < need {
        return Err(format!(
            "truncated PPM: expected {need} bytes of pixel data, found {}",
            data.len()
        ));
    }
    let pixels = data[..need]
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    RgbImage::new(width, height, pixels).map_err(|e| e.to_string())
}

#[cfg(feature = "png")]
fn decode_png(bytes: &[u8]) -> Result<RgbImage, String> {
    let mut decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::normalize_to_color8());
    let mut reader = decoder.read_info().map_err(|e| e.to_string())?;
    let mut buf = vec![0; reader.output_buffer_size().ok_or("PNG too large")?];
    let info = reader.next_frame(&mut buf).map_err(|e| e.to_string())?;
    let data = &buf[..info.buffer_size()];
    let pixels: Vec<[u8; 3]> = match info.color_type {
        png::ColorType::Rgb => data.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
        png::ColorType::Rgba => data.chunks_exact(4).map(|c| [c[0], c[1], c[2]]).collect(),
        png::ColorType::Grayscale => data.iter().map(|&g| [g; 3]).collect(),
        png::ColorType::GrayscaleAlpha => data.chunks_exact(2).map(|c| [c[0]; 3]).collect(),
        png::ColorType::Indexed => return Err("indexed PNG was not expanded".into()),
    };
    RgbImage::new(info.width as usize, info.height as usize, pixels).map_err(|e| e.to_string())
}

#[cfg(not(feature = "png"))]
fn decode_png(_: &[u8]) -> Result<RgbImage, String> {
    Err("PNG support was not compiled in".into())
}

#[cfg(feature = "png")]
pub fn encode_png(image: &RgbImage) -> Result<Vec<u8>, String> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, image.width() as u32, image.height() as u32);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().map_err(|e| e.to_string())?;
        let data: Vec<u8> = image.pixels().iter().flatten().copied().collect();
        writer.write_image_data(&data).map_err(|e| e.to_string())?;
        writer.finish().map_err(|e| e.to_string())?;
    }
    Ok(out)
}

#[cfg(not(feature = "png"))]
pub fn encode_png(_: &RgbImage) -> Result<Vec<u8>, String> {
    Err("PNG support was not compiled in".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient() -> RgbImage {
        RgbImage::from_fn(20, 17, |x, y| [x as u8 * 10, y as u8 * 12, (x + y) as u8]).unwrap()
    }

    #[test]
    fn ppm_round_trip_with_comments() {
        let img = gradient();
        let bytes = encode_ppm(&img);
        assert_eq!(decode(&bytes).unwrap(), img);
        let mut commented = b"P6 # made by hand\n20\t17\n# depth\n255\n".to_vec();
        commented.extend_from_slice(&bytes[bytes.len() - 20 * 17 * 3..]);
        assert_eq!(decode(&commented).unwrap(), img);
    }

    #[test]
    fn truncated_and_foreign_files_fail() {
        let bytes = encode_ppm(&gradient());
        assert!(decode(&bytes[..bytes.len() - 1])
            .unwrap_err()
            .contains("truncated"));
        assert!(decode(b"P3\n1 1\n255\n0 0 0").is_err());
        assert!(decode(b"P6\n20 17\n65535\n").is_err());
        assert!(decode(b"garbage").is_err());
    }

    #[cfg(feature = "png")]
    #[test]
    fn png_round_trip() {
        let img = gradient();
        assert_eq!(decode(&encode_png(&img).unwrap()).unwrap(), img);
    }
}

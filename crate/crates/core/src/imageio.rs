//! PNG/JPEG encoding, base64 image fields and small file helpers.

use std::io::Cursor;
use std::path::Path;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use image::{DynamicImage, GrayImage, ImageFormat, RgbImage};
use sha2::{Digest, Sha256};

pub fn encode_png(img: &DynamicImage) -> Vec<u8> {
    let mut buf = Vec::new();
    img.write_to(&mut Cursor::new(&mut buf), ImageFormat::Png)
        .expect("PNG encoding into memory cannot fail");
    buf
}

pub fn encode_jpeg(img: &RgbImage, quality: u8) -> Vec<u8> {
    let mut buf = Vec::new();
    let enc = image::codecs::jpeg::JpegEncoder::new_with_quality(&mut buf, quality);
    img.write_with_encoder(enc)
        .expect("JPEG encoding into memory cannot fail");
    buf
}

pub fn rgb_to_b64(img: &RgbImage) -> String {
    B64.encode(encode_png(&DynamicImage::ImageRgb8(img.clone())))
}

pub fn gray_to_b64(img: &GrayImage) -> String {
    B64.encode(encode_png(&DynamicImage::ImageLuma8(img.clone())))
}

pub fn decode_b64_image(data: &str) -> Result<DynamicImage, String> {
    let bytes = B64.decode(data.trim()).map_err(|e| format!("bad base64: {e}"))?;
    image::load_from_memory(&bytes).map_err(|e| format!("undecodable image: {e}"))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

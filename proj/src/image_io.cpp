// PNG and JPEG codec glue (libpng / libjpeg).

#include <csetjmp>
#include <cstdio>
#include <memory>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "styleaudit/errors.hpp"
#include "styleaudit/image.hpp"

namespace styleaudit {
namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

bool is_png(std::FILE* f) {
    unsigned char sig[8];
    const std::size_t got = std::fread(sig, 1, 8, f);
    std::rewind(f);
    return got == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

ImageU8 load_png_file(std::FILE* f, const std::string& name) {
    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DecodeFailure(name + ": png reader init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DecodeFailure(name + ": png info init failed");
    }
    std::vector<png_bytep> row_ptrs;
    ImageU8 image;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DecodeFailure(name + ": corrupt PNG data");
    }
    png_init_io(png, f);
    png_read_info(png, info);

    png_set_expand(png);           // palette/low-bit-depth/tRNS to full
    png_set_strip_16(png);         // 16-bit to 8-bit
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    if (png_get_channels(png, info) != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DecodeFailure(name + ": unsupported PNG channel layout");
    }
    image = ImageU8(static_cast<int>(w), static_cast<int>(h));
    row_ptrs.resize(h);
    for (png_uint_32 y = 0; y < h; ++y)
        row_ptrs[y] = image.pixels.data() + static_cast<std::size_t>(y) * w * 3;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return image;
}

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    std::longjmp(mgr->jump, 1);
}

ImageU8 load_jpeg_file(std::FILE* f, const std::string& name) {
    jpeg_decompress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw DecodeFailure(name + ": corrupt JPEG data");
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, f);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    ImageU8 image(static_cast<int>(cinfo.output_width),
                  static_cast<int>(cinfo.output_height));
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = image.pixels.data() +
                       static_cast<std::size_t>(cinfo.output_scanline) *
                           cinfo.output_width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return image;
}

}  // namespace

ImageU8 load_image(const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.string().c_str(), "rb"));
    if (!f) throw DecodeFailure(path.string() + ": cannot open file");
    ImageU8 image = is_png(f.get()) ? load_png_file(f.get(), path.string())
                                    : load_jpeg_file(f.get(), path.string());
    if (image.width < 1 || image.height < 1)
        throw DecodeFailure(path.string() + ": empty image");
    return image;
}

void save_png(const ImageU8& image, const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.string().c_str(), "wb"));
    if (!f) throw IoError(path.string() + ": cannot open for writing");
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png writer init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png writer info init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError(path.string() + ": PNG write failed");
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < image.height; ++y)
        png_write_row(png, const_cast<png_bytep>(image.at(0, y)));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace styleaudit

// Image feature extractors. Each enabled extractor contributes one
// descriptor value plus one graph relation linking the image to it.
#pragma once

#include "hyperrag/image.hpp"
#include "hyperrag/model.hpp"
#include "hyperrag/providers.hpp"

#include <array>
#include <string>
#include <vector>

namespace hyperrag {

struct ColorExtraction {
    std::array<int, 3> avg_rgb{0, 0, 0};
    std::string named_color;
};

// Per-channel arithmetic mean over all pixels, rounded half-up; named color
// is the nearest of the 16 basic CSS colors, ties by palette (alphabetical)
// order.
ColorExtraction extract_color(const Image& image);

// Pixels in the 16-color palette, alphabetical; exposed for oracle tests.
const std::array<std::pair<const char*, Rgb>, 16>& css_basic_palette();

// Background is the modal color of the 1-pixel border; foreground is every
// pixel whose RGB distance from it exceeds 32. Aspect ratio comes from the
// foreground bounding box (whole image when nothing clears the threshold).
ShapeDescriptor extract_shape(const Image& image);

// Provider tokens lowercased and punctuation-stripped, order preserved;
// tokens emptied by normalization are dropped along with their confidence.
OcrDescriptor extract_ocr(const std::vector<uint8_t>& image_bytes, OcrProvider& provider);

// Caption for the image, cached by content hash when a cache is supplied.
// A whitespace-only caption is a provider defect, reported as EmptyCaption.
std::string extract_caption(const std::vector<uint8_t>& image_bytes, CaptionProvider& provider,
                            ProviderCache* cache);

// One graph relation per succeeded lambda: the image entity plus one
// descriptor entity named by the canonical descriptor string.
struct DescriptorRelation {
    int lambda = 0;               // 1 color, 2 shape, 3 ocr, 4 caption
    std::string descriptor_name;  // canonical descriptor string
    std::string relation_text;
};

struct ExtractedDescriptors {
    DescriptorSet set;
    std::vector<DescriptorRelation> relations;
    std::vector<std::string> warnings;  // skipped optional lambdas, one line each
};

struct ExtractOptions {
    LambdaSet enabled;  // non-empty subset of {1,2,3,4}
    bool shape_text_from_caption = false;
    int max_ocr_entity_tokens = 16;  // cap on tokens folded into the ocr descriptor name
};

// Runs exactly the enabled extractors. Color and shape failures abort the
// image; OCR/caption failures record a null descriptor and continue. An OCR
// result with zero surviving tokens emits no relation (there is no
// descriptor string to name an entity with).
ExtractedDescriptors extract_all(const Image& image, const std::vector<uint8_t>& image_bytes,
                                 const ExtractOptions& options, OcrProvider* ocr,
                                 CaptionProvider* caption, ProviderCache* cache);

}  // namespace hyperrag

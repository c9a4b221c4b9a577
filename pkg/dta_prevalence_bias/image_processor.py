"""
Raster overview panels: every setup of a run in one PNG per measure, with a
correlation badge per setup.
"""

import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

from PIL import Image, ImageDraw, ImageFont

from .association import correlation_report, estimates_frame
from .tables import EstimateRecord

logger = logging.getLogger(__name__)

# RGB per setup number, matching the SVG scatter colours.
SETUP_COLORS: Dict[int, Tuple[int, int, int]] = {
    1: (220, 0, 0),
    2: (0, 150, 0),
    3: (0, 0, 220),
    4: (128, 0, 128),
}


class OverviewPanelRenderer:
    """
    Draws study estimates of all setups on a single unit-square panel.
    """

    def __init__(self, size: int = 640, margin: int = 60, point_radius: int = 2, font_size: int = 14):
        """
        Initialize the renderer.

        Args:
            size: Width and height of the image in pixels
            margin: Space around the plotting area in pixels
            point_radius: Radius of one study marker in pixels
            font_size: Font size of labels and badges
        """
        if size <= 2 * margin:
            raise ValueError(f"Image size {size} leaves no plotting area with margin {margin}")
        self.size = size
        self.margin = margin
        self.point_radius = point_radius
        self.font_size = font_size
        self.frame_color = (0, 0, 0)
        self.frame_width = 2
        self.badge_text_color = (255, 255, 255)
        self.background = (255, 255, 255)

    def _font(self):
        try:
            return ImageFont.truetype("DejaVuSans.ttf", self.font_size)
        except OSError:
            return ImageFont.load_default()

    def _to_pixel(self, x: float, y: float) -> Tuple[int, int]:
        span = self.size - 2 * self.margin
        return (
            int(round(self.margin + x * span)),
            int(round(self.size - self.margin - y * span)),
        )

    def _draw_box(self, draw: ImageDraw.ImageDraw, coords: Tuple[int, int, int, int]):
        left, top, right, bottom = coords
        for i in range(self.frame_width):
            draw.rectangle([left + i, top + i, right - i, bottom - i], outline=self.frame_color)

    def _draw_badge(
        self,
        draw: ImageDraw.ImageDraw,
        anchor: Tuple[int, int],
        text: str,
        bg_color: Tuple[int, int, int],
        font,
    ) -> int:
        """
        Draw a filled label with its top-right corner at ``anchor``.

        Returns:
            Height of the badge in pixels
        """
        right, top = anchor
        bbox = draw.textbbox((0, 0), text, font=font)
        text_width = bbox[2] - bbox[0]
        text_height = bbox[3] - bbox[1]
        x = right - text_width - 10
        draw.rectangle([x - 5, top - 2, x + text_width + 5, top + text_height + 4], fill=bg_color)
        draw.text((x, top), text, fill=self.badge_text_color, font=font)
        return text_height + 8

    def render(
        self,
        records: Iterable[EstimateRecord],
        measure: str,
        output_path: Union[str, Path],
        title: Optional[str] = None,
    ) -> Path:
        """
        Render one overview panel.

        Args:
            records: Estimates of one or more setups
            measure: ``"se"`` or ``"sp"``
            output_path: PNG file to write
            title: Text above the panel

        Returns:
            Path of the written PNG
        """
        if measure not in ("se", "sp"):
            raise ValueError(f"measure must be 'se' or 'sp', got '{measure}'")
        records = list(records)
        frame = estimates_frame(records)
        reports = {r.setup_label: r for r in correlation_report(records)}

        image = Image.new("RGB", (self.size, self.size), self.background)
        draw = ImageDraw.Draw(image)
        font = self._font()

        left, bottom = self._to_pixel(0.0, 0.0)
        right, top = self._to_pixel(1.0, 1.0)
        self._draw_box(draw, (left, top, right, bottom))

        column = f"{measure}_hat"
        badge_top = top + 8
        for label, group in frame.groupby("setup_label", sort=False):
            number = int(str(label).split()[-1]) if str(label).split()[-1].isdigit() else 0
            color = SETUP_COLORS.get(number, (0, 0, 0))
            r = self.point_radius
            for x, y in group[["prev_hat", column]].dropna().itertuples(index=False):
                px, py = self._to_pixel(x, y)
                draw.ellipse([px - r, py - r, px + r, py + r], outline=color)
            report = reports[str(label)]
            rho = report.rho_se_prev if measure == "se" else report.rho_sp_prev
            text = f"{label}: " + ("n/a" if rho is None else f"{rho:.3f}")
            badge_top += self._draw_badge(draw, (right - 4, badge_top), text, color, font)

        axis_name = "sensitivity" if measure == "se" else "specificity"
        draw.text((left, bottom + 10), "0", fill=self.frame_color, font=font)
        draw.text((right - 10, bottom + 10), "1", fill=self.frame_color, font=font)
        draw.text(((left + right) // 2 - 60, bottom + 25), "Estimated prevalence", fill=self.frame_color, font=font)
        draw.text((8, top), f"Estimated\n{axis_name}", fill=self.frame_color, font=font)
        if title:
            draw.text((left, 15), title, fill=self.frame_color, font=font)

        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        image.save(output_path, "PNG")
        logger.debug("Wrote %s", output_path)
        return output_path

    def render_panels(
        self,
        records: Iterable[EstimateRecord],
        output_dir: Union[str, Path],
        title: Optional[str] = None,
    ) -> List[Path]:
        """Write ``overview_se.png`` and ``overview_sp.png`` into ``output_dir``."""
        records = list(records)
        output_dir = Path(output_dir)
        return [
            self.render(records, measure, output_dir / f"overview_{measure}.png", title=title)
            for measure in ("se", "sp")
        ]

import type { ClassContours } from "./types.js";
import type { ClassView } from "./state.js";
import { classHue, levelLightness } from "./state.js";

export interface Viewport {
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

/** Data-space bounding box of every polyline, padded by 5%. */
export function contourBounds(contours: ClassContours[]): Viewport | null {
  let xMin = Infinity;
  let xMax = -Infinity;
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const cls of contours) {
    for (const level of cls.levels) {
      for (const poly of level.polylines) {
        for (const [x, y] of poly) {
          xMin = Math.min(xMin, x);
          xMax = Math.max(xMax, x);
          yMin = Math.min(yMin, y);
          yMax = Math.max(yMax, y);
        }
      }
    }
  }
  if (!Number.isFinite(xMin) || !Number.isFinite(yMin)) {
    return null;
  }
  const padX = 0.05 * (xMax - xMin || 1);
  const padY = 0.05 * (yMax - yMin || 1);
  return {
    xMin: xMin - padX,
    xMax: xMax + padX,
    yMin: yMin - padY,
    yMax: yMax + padY,
  };
}

function pathData(
  poly: [number, number][],
  vp: Viewport,
  width: number,
  height: number,
): string {
  const sx = width / (vp.xMax - vp.xMin);
  const sy = height / (vp.yMax - vp.yMin);
  return poly
    .map(([x, y], i) => {
      const px = ((x - vp.xMin) * sx).toFixed(2);
      // flip y: SVG grows downward, data grows upward
      const py = (height - (y - vp.yMin) * sy).toFixed(2);
      return `${i === 0 ? "M" : "L"}${px},${py}`;
    })
    .join(" ");
}

/**
 * Render the contour scene as an SVG string. One hue per class; the density
 * levels of a class are lines whose lightness is linear in rho. Classes
 * toggled invisible are skipped; levels with no polylines are silently
 * absent. The UI does no density math — it draws server geometry only.
 */
export function renderScene(
  contours: ClassContours[],
  classes: ClassView[],
  width = 640,
  height = 640,
): string {
  const vp = contourBounds(contours);
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
  ];
  if (vp !== null) {
    contours.forEach((cls, i) => {
      const view = classes[i];
      if (view !== undefined && !view.visible) {
        return;
      }
      const hue = classHue(i);
      for (const level of cls.levels) {
        const light = levelLightness(level.rho).toFixed(0);
        const stroke = `hsl(${hue}, 70%, ${light}%)`;
        for (const poly of level.polylines) {
          if (poly.length < 2) {
            continue;
          }
          const d = pathData(poly, vp, width, height);
          parts.push(
            `<path d="${d}" fill="none" stroke="${stroke}" stroke-width="1.5" data-class="${cls.class_id}" data-rho="${level.rho}"/>`,
          );
        }
      }
    });
  }
  parts.push("</svg>");
  return parts.join("\n");
}

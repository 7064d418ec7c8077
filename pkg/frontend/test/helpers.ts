import { writeFileSync } from "fs";
import { PNG } from "pngjs";

/** Write a small solid-color or gradient test PNG and return its path. */
export function makePng(
  path: string,
  width: number,
  height: number,
  pixel: (x: number, y: number) => [number, number, number],
): string {
  const png = new PNG({ width, height });
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const [r, g, b] = pixel(x, y);
      const i = (y * width + x) * 4;
      png.data[i] = r;
      png.data[i + 1] = g;
      png.data[i + 2] = b;
      png.data[i + 3] = 255;
    }
  }
  writeFileSync(path, PNG.sync.write(png));
  return path;
}

export const solid = (r: number, g: number, b: number) => (): [number, number, number] => [r, g, b];

export const gradient = (x: number, y: number): [number, number, number] => [
  (x * 7) % 256,
  (y * 11) % 256,
  (x + y) % 256,
];

/** PNG decoding/encoding to unit-interval RGB tensors (HWC Float32Array). */

import * as fs from 'node:fs'
import * as path from 'node:path'
import { PNG } from 'pngjs'

export interface RgbImage {
  height: number
  width: number
  /** row-major channel-last RGB, values in [0,1], length H*W*3 */
  data: Float32Array
}

export function readImagePng(file: string): RgbImage {
  const png = PNG.sync.read(fs.readFileSync(file))
  const data = new Float32Array(png.height * png.width * 3)
  for (let i = 0; i < png.height * png.width; i++) {
    data[i * 3] = png.data[i * 4] / 255
    data[i * 3 + 1] = png.data[i * 4 + 1] / 255
    data[i * 3 + 2] = png.data[i * 4 + 2] / 255
  }
  return { height: png.height, width: png.width, data }
}

export function writeImagePng(file: string, image: RgbImage): void {
  const png = new PNG({ width: image.width, height: image.height })
  for (let i = 0; i < image.height * image.width; i++) {
    png.data[i * 4] = Math.round(Math.min(1, Math.max(0, image.data[i * 3])) * 255)
    png.data[i * 4 + 1] = Math.round(Math.min(1, Math.max(0, image.data[i * 3 + 1])) * 255)
    png.data[i * 4 + 2] = Math.round(Math.min(1, Math.max(0, image.data[i * 3 + 2])) * 255)
    png.data[i * 4 + 3] = 255
  }
  fs.writeFileSync(file, PNG.sync.write(png))
}

/** Writes a constant-value 8-bit grayscale mask PNG (255 = full weight). */
export function writeFullMaskPng(file: string, height: number, width: number): void {
  const png = new PNG({ width, height })
  png.data.fill(255)
  fs.writeFileSync(file, PNG.sync.write(png))
}

export function listPngs(dir: string): string[] {
  if (!fs.existsSync(dir) || !fs.statSync(dir).isDirectory()) {
    throw new Error(`not a directory: ${dir}`)
  }
  return fs
    .readdirSync(dir)
    .filter((name) => name.toLowerCase().endsWith('.png'))
    .sort()
    .map((name) => path.join(dir, name))
}

export function stem(file: string): string {
  return path.basename(file).replace(/\.[^.]+$/, '')
}

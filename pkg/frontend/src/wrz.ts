/**
 * Binary grid formats shared with the wildsieve toolkit.
 *
 * WRZF: magic "WRZF", u32-LE version=1, u32 h, u32 w, u32 d, then h*w*d
 * float32-LE, row-major channel-last.
 * WRZL: magic "WRZL", u32-LE version=1, u32 nLayers, then per layer
 * u32 H, u32 W followed by H*W float32-LE.
 */

import * as fs from 'node:fs'

const VERSION = 1

export interface FeatureGrid {
  h: number
  w: number
  d: number
  /** row-major channel-last, length h*w*d */
  data: Float32Array
}

export interface LayerDiff {
  height: number
  width: number
  /** row-major, length height*width */
  data: Float32Array
}

function float32Bytes(data: Float32Array): Buffer {
  const buf = Buffer.alloc(data.length * 4)
  for (let i = 0; i < data.length; i++) {
    buf.writeFloatLE(data[i], i * 4)
  }
  return buf
}

export function encodeFeatureFile(grid: FeatureGrid): Buffer {
  if (grid.data.length !== grid.h * grid.w * grid.d) {
    throw new Error(
      `feature data length ${grid.data.length} != h*w*d = ${grid.h * grid.w * grid.d}`,
    )
  }
  const header = Buffer.alloc(20)
  header.write('WRZF', 0, 'ascii')
  header.writeUInt32LE(VERSION, 4)
  header.writeUInt32LE(grid.h, 8)
  header.writeUInt32LE(grid.w, 12)
  header.writeUInt32LE(grid.d, 16)
  return Buffer.concat([header, float32Bytes(grid.data)])
}

export function writeFeatureFile(path: string, grid: FeatureGrid): void {
  fs.writeFileSync(path, encodeFeatureFile(grid))
}

export function readFeatureFile(path: string): FeatureGrid {
  const buf = fs.readFileSync(path)
  if (buf.subarray(0, 4).toString('ascii') !== 'WRZF') {
    throw new Error(`${path}: bad WRZF magic`)
  }
  if (buf.readUInt32LE(4) !== VERSION) {
    throw new Error(`${path}: unsupported WRZF version`)
  }
  const h = buf.readUInt32LE(8)
  const w = buf.readUInt32LE(12)
  const d = buf.readUInt32LE(16)
  const expected = 20 + h * w * d * 4
  if (buf.length !== expected) {
    throw new Error(`${path}: expected ${expected} bytes, found ${buf.length}`)
  }
  const data = new Float32Array(h * w * d)
  for (let i = 0; i < data.length; i++) {
    data[i] = buf.readFloatLE(20 + i * 4)
  }
  return { h, w, d, data }
}

export function encodeLayerDiffFile(layers: LayerDiff[]): Buffer {
  if (layers.length === 0) {
    throw new Error('WRZL files need at least one layer')
  }
  const header = Buffer.alloc(12)
  header.write('WRZL', 0, 'ascii')
  header.writeUInt32LE(VERSION, 4)
  header.writeUInt32LE(layers.length, 8)
  const parts: Buffer[] = [header]
  for (const layer of layers) {
    if (layer.data.length !== layer.height * layer.width) {
      throw new Error(`layer data length ${layer.data.length} != H*W`)
    }
    const dims = Buffer.alloc(8)
    dims.writeUInt32LE(layer.height, 0)
    dims.writeUInt32LE(layer.width, 4)
    parts.push(dims, float32Bytes(layer.data))
  }
  return Buffer.concat(parts)
}

export function writeLayerDiffFile(path: string, layers: LayerDiff[]): void {
  fs.writeFileSync(path, encodeLayerDiffFile(layers))
}

export function readLayerDiffFile(path: string): LayerDiff[] {
  const buf = fs.readFileSync(path)
  if (buf.subarray(0, 4).toString('ascii') !== 'WRZL') {
    throw new Error(`${path}: bad WRZL magic`)
  }
  if (buf.readUInt32LE(4) !== VERSION) {
    throw new Error(`${path}: unsupported WRZL version`)
  }
  const count = buf.readUInt32LE(8)
  const layers: LayerDiff[] = []
  let offset = 12
  for (let i = 0; i < count; i++) {
    const height = buf.readUInt32LE(offset)
    const width = buf.readUInt32LE(offset + 4)
    offset += 8
    const data = new Float32Array(height * width)
    for (let j = 0; j < data.length; j++) {
      data[j] = buf.readFloatLE(offset + j * 4)
    }
    offset += data.length * 4
    layers.push({ height, width, data })
  }
  if (offset !== buf.length) {
    throw new Error(`${path}: trailing bytes after last layer`)
  }
  return layers
}

import * as fs from 'node:fs'
import * as os from 'node:os'
import * as path from 'node:path'
import { afterAll, describe, expect, it } from 'vitest'
import { readFeatureFile, readLayerDiffFile, writeFeatureFile, writeLayerDiffFile } from '../src/wrz.js'

const tmp = fs.mkdtempSync(path.join(os.tmpdir(), 'wrz-'))
afterAll(() => fs.rmSync(tmp, { recursive: true, force: true }))

describe('WRZF', () => {
  it('roundtrips bit-exactly', () => {
    const data = new Float32Array(2 * 3 * 4)
    for (let i = 0; i < data.length; i++) data[i] = Math.fround(Math.sin(i) * 3)
    const file = path.join(tmp, 'a.wrzf')
    writeFeatureFile(file, { h: 2, w: 3, d: 4, data })
    const back = readFeatureFile(file)
    expect(back.h).toBe(2)
    expect(back.w).toBe(3)
    expect(back.d).toBe(4)
    expect(Array.from(back.data)).toEqual(Array.from(data))
  })

  it('writes the documented header layout', () => {
    const file = path.join(tmp, 'b.wrzf')
    writeFeatureFile(file, { h: 5, w: 6, d: 7, data: new Float32Array(5 * 6 * 7) })
    const buf = fs.readFileSync(file)
    expect(buf.subarray(0, 4).toString('ascii')).toBe('WRZF')
    expect(buf.readUInt32LE(4)).toBe(1)
    expect(buf.readUInt32LE(8)).toBe(5)
    expect(buf.readUInt32LE(12)).toBe(6)
    expect(buf.readUInt32LE(16)).toBe(7)
    expect(buf.length).toBe(20 + 4 * 5 * 6 * 7)
  })

  it('rejects length mismatches', () => {
    expect(() =>
      writeFeatureFile(path.join(tmp, 'c.wrzf'), { h: 2, w: 2, d: 2, data: new Float32Array(7) }),
    ).toThrow(/length/)
  })
})

describe('WRZL', () => {
  it('roundtrips layer stacks', () => {
    const layers = [
      { height: 4, width: 6, data: Float32Array.from({ length: 24 }, (_, i) => i / 10) },
      { height: 2, width: 3, data: Float32Array.from({ length: 6 }, (_, i) => i) },
    ]
    const file = path.join(tmp, 'd.wrzl')
    writeLayerDiffFile(file, layers)
    const back = readLayerDiffFile(file)
    expect(back.length).toBe(2)
    expect(back[0].height).toBe(4)
    expect(Array.from(back[1].data)).toEqual([0, 1, 2, 3, 4, 5])
  })

  it('rejects empty stacks', () => {
    expect(() => writeLayerDiffFile(path.join(tmp, 'e.wrzl'), [])).toThrow(/at least one/)
  })
})

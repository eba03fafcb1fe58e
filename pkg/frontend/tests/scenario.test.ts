import { describe, expect, it } from 'vitest'

import {
  canSubmit,
  clampLevel,
  draftToRequest,
  emptyDraft,
  liftSectorDraft,
  validateRequest,
} from '../src/scenario.js'
import { INDICATORS } from '../src/types.js'

describe('slider clamping', () => {
  it('clamps into each indicator ordinal range', () => {
    expect(clampLevel('school', 9)).toBe(3)
    expect(clampLevel('school', -2)).toBe(0)
    expect(clampLevel('gatherings', 9)).toBe(4)
    expect(clampLevel('transport', 5)).toBe(2)
    expect(clampLevel('travel', 3.6)).toBe(4)
  })
})

describe('draft to request mapping', () => {
  it('moved sliders become overrides with their ordinal value', () => {
    const draft = emptyDraft('2020-09-01')
    draft.modelId = 'm1'
    draft.horizon = 7
    draft.sliders.gatherings = 3
    const req = draftToRequest(draft)
    expect(req.overrides).toEqual([{ indicator: 'gatherings', level: 3, from: 0, to: 6 }])
    expect(req.horizon).toBe(7)
    expect(req.start).toBe('2020-09-01')
  })

  it('untouched sliders produce no overrides', () => {
    const draft = emptyDraft('2020-09-01')
    draft.horizon = 5
    expect(draftToRequest(draft).overrides).toEqual([])
  })

  it('lift-sector preset zeroes exactly one indicator', () => {
    const draft = liftSectorDraft({ ...emptyDraft('2020-09-01'), modelId: 'm1' }, 'travel')
    const req = draftToRequest(draft)
    expect(req.name).toBe('lift-travel')
    expect(req.overrides).toEqual([{ indicator: 'travel', level: 0, from: 0, to: 13 }])
  })

  it('explicit per-indicator ranges are preserved', () => {
    const draft = emptyDraft('2020-09-01')
    draft.horizon = 10
    draft.sliders.school = 0
    draft.ranges.school = { from: 2, to: 5 }
    expect(draftToRequest(draft).overrides).toEqual([
      { indicator: 'school', level: 0, from: 2, to: 5 },
    ])
  })
})

describe('request validation mirrors server rules', () => {
  const base = { name: 'x', start: '2020-09-01', horizon: 7 }

  it('accepts a well-formed request', () => {
    expect(validateRequest({ ...base, overrides: [{ indicator: 'school', level: 0 }] })).toEqual([])
  })

  it('rejects out-of-range levels', () => {
    const problems = validateRequest({
      ...base,
      overrides: [{ indicator: 'gatherings', level: 5 }],
    })
    expect(problems.some((p) => p.includes('[0,4]'))).toBe(true)
  })

  it('rejects offsets outside the horizon', () => {
    const problems = validateRequest({
      ...base,
      overrides: [{ indicator: 'school', level: 0, from: 0, to: 7 }],
    })
    expect(problems.length).toBeGreaterThan(0)
  })

  it('rejects non-positive horizons and bad dates', () => {
    expect(validateRequest({ ...base, horizon: 0, overrides: [] }).length).toBeGreaterThan(0)
    expect(validateRequest({ ...base, start: 'tomorrow', overrides: [] }).length).toBeGreaterThan(0)
  })

  it('covers all five indicators', () => {
    expect(INDICATORS.map((i) => i.key).sort()).toEqual(
      ['gatherings', 'school', 'transport', 'travel', 'workplace'].sort(),
    )
  })
})

describe('submit gating', () => {
  it('disabled until a model is selected and horizon >= 1', () => {
    const draft = emptyDraft('2020-09-01')
    expect(canSubmit(draft)).toBe(false)
    draft.modelId = 'm1'
    expect(canSubmit(draft)).toBe(true)
    draft.horizon = 0
    expect(canSubmit(draft)).toBe(false)
  })
})

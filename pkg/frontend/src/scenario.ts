import { INDICATORS, type IndicatorKey, type ScenarioRequest } from './types.js'

/** Editable scenario state behind the builder form. */
export interface ScenarioDraft {
  name: string
  modelId: string | null
  start: string
  horizon: number
  /** slider position per indicator; null = keep the actual schedule */
  sliders: Record<IndicatorKey, number | null>
  /** optional per-indicator day-offset window for the override */
  ranges: Record<IndicatorKey, { from: number; to: number } | null>
}

export function emptyDraft(start = ''): ScenarioDraft {
  const sliders = {} as ScenarioDraft['sliders']
  const ranges = {} as ScenarioDraft['ranges']
  for (const ind of INDICATORS) {
    sliders[ind.key] = null
    ranges[ind.key] = null
  }
  return { name: '', modelId: null, start, horizon: 14, sliders, ranges }
}

export function indicatorMax(key: IndicatorKey): number {
  const found = INDICATORS.find((i) => i.key === key)
  if (!found) throw new Error(`unknown indicator ${key}`)
  return found.max
}

/** Clamp a slider position into the indicator's ordinal range. */
export function clampLevel(key: IndicatorKey, value: number): number {
  const max = indicatorMax(key)
  return Math.min(max, Math.max(0, Math.round(value)))
}

/** Form state -> request payload; only moved sliders become overrides. */
export function draftToRequest(draft: ScenarioDraft): ScenarioRequest {
  const overrides = []
  for (const ind of INDICATORS) {
    const level = draft.sliders[ind.key]
    if (level === null) continue
    const range = draft.ranges[ind.key]
    overrides.push({
      indicator: ind.key,
      level: clampLevel(ind.key, level),
      from: range ? range.from : 0,
      to: range ? range.to : draft.horizon - 1,
    })
  }
  return {
    name: draft.name || 'unnamed',
    start: draft.start,
    horizon: draft.horizon,
    overrides,
  }
}

/** Mirror of the server's scenario rules; run before every submit. */
export function validateRequest(req: ScenarioRequest): string[] {
  const problems: string[] = []
  if (!/^\d{4}-\d{2}-\d{2}$/.test(req.start)) problems.push(`start must be an ISO date, got "${req.start}"`)
  if (!Number.isInteger(req.horizon) || req.horizon < 1) problems.push('horizon must be a positive integer')
  for (const ov of req.overrides) {
    const ind = INDICATORS.find((i) => i.key === ov.indicator)
    if (!ind) {
      problems.push(`unknown indicator "${ov.indicator}"`)
      continue
    }
    if (!Number.isInteger(ov.level) || ov.level < 0 || ov.level > ind.max)
      problems.push(`${ind.label} level ${ov.level} outside [0,${ind.max}]`)
    const from = ov.from ?? 0
    const to = ov.to ?? req.horizon - 1
    if (from < 0 || to < from || to >= req.horizon)
      problems.push(`${ind.label} offsets [${from},${to}] outside [0,${req.horizon - 1}]`)
  }
  return problems
}

/** Submit is enabled only with a model picked and a sane horizon. */
export function canSubmit(draft: ScenarioDraft): boolean {
  return draft.modelId !== null && draft.horizon >= 1 && validateRequest(draftToRequest(draft)).length === 0
}

export function liftSectorDraft(base: ScenarioDraft, key: IndicatorKey): ScenarioDraft {
  const sliders = { ...base.sliders, [key]: 0 }
  return { ...base, name: `lift-${key}`, sliders }
}

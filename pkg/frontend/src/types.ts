// Wire types mirroring the service JSON bodies.

export interface CountrySummary {
  country: string
  start: string
  end: string
  days: number
  first_case_date: string | null
}

export interface DatasetSummary {
  dataset_id: string
  countries: CountrySummary[]
  warnings: string[]
}

export interface CasePoint {
  date: string
  new_cases: number
}

export interface RtPoint {
  date: string
  mode: number
  mean: number
  ci_low: number
  ci_high: number
}

export interface JobSummary {
  job_id: string
  kind: string
  status: 'pending' | 'running' | 'done' | 'failed'
  detail: string
  model_id: string | null
}

export interface ModelSummary {
  model_id: string
  dataset_id: string
  target_country: string
  variant: string
  cluster_countries: string[]
  created_at: string
  metadata: Record<string, unknown>
}

export interface ForecastPoint {
  date: string
  predicted_cases: number
}

export interface OverrideSpec {
  indicator: string
  level: number
  from?: number
  to?: number
}

export interface ScenarioRequest {
  name: string
  start: string
  horizon: number
  overrides: OverrideSpec[]
}

export interface ScenarioResult {
  scenario: string
  start: string
  dates: string[]
  baseline: number[]
  counterfactual: number[]
  delta: number[]
  cumulative_delta: number
}

export interface ApiErrorBody {
  error: { code: string; message: string }
}

// The five ordinal indicators and their maxima (order matches the service).
export const INDICATORS = [
  { key: 'school', label: 'School closing', max: 3 },
  { key: 'workplace', label: 'Workplace closing', max: 3 },
  { key: 'gatherings', label: 'Gathering restrictions', max: 4 },
  { key: 'transport', label: 'Public transport shutdown', max: 2 },
  { key: 'travel', label: 'Travel controls', max: 4 },
] as const

export type IndicatorKey = (typeof INDICATORS)[number]['key']

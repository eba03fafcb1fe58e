import type {
  ApiErrorBody,
  CasePoint,
  DatasetSummary,
  ForecastPoint,
  JobSummary,
  ModelSummary,
  RtPoint,
  ScenarioRequest,
  ScenarioResult,
} from './types.js'

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message)
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let code = 'http_error'
  let message = `${resp.status} ${resp.statusText}`
  try {
    const body = (await resp.json()) as ApiErrorBody
    if (body && body.error) {
      code = body.error.code
      message = body.error.message
    }
  } catch {
    // non-JSON error body: keep the status line
  }
  return new ApiError(resp.status, code, message)
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(base + path, init)
  if (!resp.ok) throw await parseError(resp)
  return (await resp.json()) as T
}

/** Thin typed client over the service endpoints; no recomputation client-side. */
export class Api {
  constructor(readonly base: string = '') {}

  health(): Promise<{ status: string; version: string }> {
    return request(this.base, '/health')
  }

  uploadDataset(casesCsv: string, policyCsv: string): Promise<DatasetSummary> {
    // multipart body built by hand: portable across browsers and test runtimes
    const boundary = `----policyscope${Date.now().toString(16)}`
    const part = (name: string, filename: string, content: string) =>
      `--${boundary}\r\n` +
      `Content-Disposition: form-data; name="${name}"; filename="${filename}"\r\n` +
      `Content-Type: text/csv\r\n\r\n${content}\r\n`
    const body =
      part('cases', 'cases.csv', casesCsv) +
      part('policy', 'policy.csv', policyCsv) +
      `--${boundary}--\r\n`
    return request(this.base, '/datasets', {
      method: 'POST',
      headers: { 'content-type': `multipart/form-data; boundary=${boundary}` },
      body,
    })
  }

  listDatasets(): Promise<DatasetSummary[]> {
    return request(this.base, '/datasets')
  }

  cases(datasetId: string, country: string): Promise<CasePoint[]> {
    return request(this.base, `/datasets/${datasetId}/cases?country=${encodeURIComponent(country)}`)
  }

  rt(datasetId: string, country: string): Promise<RtPoint[]> {
    return request(this.base, `/datasets/${datasetId}/rt?country=${encodeURIComponent(country)}`)
  }

  submitTraining(body: {
    dataset_id: string
    country: string
    variant?: string
    seed?: number
    config?: unknown
    train_end?: string
  }): Promise<JobSummary> {
    return request(this.base, '/models', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    })
  }

  job(jobId: string): Promise<JobSummary> {
    return request(this.base, `/jobs/${jobId}`)
  }

  listModels(): Promise<ModelSummary[]> {
    return request(this.base, '/models')
  }

  forecast(modelId: string, start: string, horizon: number): Promise<ForecastPoint[]> {
    return request(this.base, `/models/${modelId}/forecast`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ start, horizon }),
    })
  }

  whatif(modelId: string, scenario: ScenarioRequest): Promise<ScenarioResult> {
    return request(this.base, `/models/${modelId}/whatif`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(scenario),
    })
  }
}

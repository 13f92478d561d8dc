/** Payload shapes of the weight-steering HTTP API. */

export interface ContourLevel {
  rho: number;
  threshold: number;
  /** Closed or open polylines as [x, y] vertex lists in data units. */
  polylines: [number, number][][];
}

export interface ClassContours {
  class_id: number;
  name: string;
  levels: ContourLevel[];
}

export interface ProjectionJson {
  /** d rows of length D: the projection basis, transposed. */
  basis: number[][];
  eigenvalues: number[];
}

export interface SessionDescriptor {
  session_id: string;
  classes: { class_id: number; name: string }[];
  d: number;
  rhos: number[];
  resolution: number[];
  revision: number;
  tau: number[];
  projection: ProjectionJson;
  contours: ClassContours[];
}

export interface WeightUpdateResponse {
  revision: number;
  tau: number[];
  projection: ProjectionJson;
  contours: ClassContours[];
}

double control(double RPM, double Speed){
  if (RPM > 3300){
    if (Speed > 80){
      Throttle = -RPM*0.002 - Speed*1.1 + 183.0;
    } else {
      Throttle = - RPM*0.001 + Speed*0.6 + 19.0;
    }
  } else {
    if (Speed > 80){
      Throttle = RPM*0.001 - Speed*1.7 + 216.0;
    } else {
      Throttle = - RPM*0.001 - Speed*0.6 + 139.0;
    }
  }
  return Throttle;
}
